/*
 * Copyright 2026 The depemb Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// word2vec text format: a `V d` header, then `word v1 ... vd` per line.
// Values are printed with 9 significant digits.

#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "depemb/common.hpp"
#include "depemb/trainer.hpp"

namespace depemb {

template <typename Real>
void save_matrix(std::ostream& out, const Vocabulary& vocab,
                 const Matrix<Real>& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line = vocab.word(static_cast<WordId>(r));
    for (Real x : m.row(r)) {
      if (!std::isfinite(x)) {
        throw NumericError("refusing to save non-finite value for '" +
                           vocab.word(static_cast<WordId>(r)) + "'");
      }
      std::snprintf(buf, sizeof(buf), " %.9g", static_cast<double>(x));
      line += buf;
    }
    line += '\n';
    out << line;
  }
}

template <typename Real>
void save_vectors(std::ostream& out, const EmbeddingSet<Real>& set) {
  save_matrix(out, set.word_vocab, set.word_vectors);
}

template <typename Real>
void save_context_vectors(std::ostream& out, const EmbeddingSet<Real>& set) {
  save_matrix(out, set.context_vocab, set.context_vectors);
}

// Loads word vectors; the context side of the returned set is empty.
template <typename Real = float>
EmbeddingSet<Real> load_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("vector file is empty");
  ++line_no;
  const auto header = strings::split_ws(strings::trim(line));
  std::optional<std::size_t> rows, cols;
  if (header.size() == 2) {
    rows = strings::parse_int<std::size_t>(header[0]);
    cols = strings::parse_int<std::size_t>(header[1]);
  }
  if (!rows || !cols || *cols == 0) {
    throw DataError("vector file line 1: expected header 'V d'");
  }
  EmbeddingSet<Real> set;
  set.word_vectors = Matrix<Real>(*rows, *cols);
  std::vector<std::string> words;
  words.reserve(*rows);
  for (std::size_t r = 0; r < *rows; ++r) {
    if (!std::getline(in, line)) {
      throw DataError("vector file line " + std::to_string(line_no + 1) +
                      ": header announces " + std::to_string(*rows) +
                      " vectors but the file ends after " + std::to_string(r));
    }
    ++line_no;
    const auto fields = strings::split_ws(strings::trim(line));
    if (fields.size() != *cols + 1) {
      throw DataError("vector file line " + std::to_string(line_no) +
                      ": expected " + std::to_string(*cols + 1) +
                      " fields, found " + std::to_string(fields.size()));
    }
    words.emplace_back(fields[0]);
    auto row = set.word_vectors.row(r);
    for (std::size_t c = 0; c < *cols; ++c) {
      auto v = strings::parse_double(fields[c + 1]);
      if (!v || !std::isfinite(*v)) {
        throw DataError("vector file line " + std::to_string(line_no) +
                        ": bad value '" + std::string(fields[c + 1]) + "'");
      }
      row[c] = static_cast<Real>(*v);
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!strings::trim(line).empty()) {
      throw DataError("vector file line " + std::to_string(line_no) +
                      ": more vectors than the header announces");
    }
  }
  set.word_vocab = Vocabulary::from_words(std::move(words));
  return set;
}

}  // namespace depemb
