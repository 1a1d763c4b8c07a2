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

// Naive two-pass CoNLL-U splitter used as a test oracle. Shares no code with
// the library: pass one cuts the text into blocks at blank lines, pass two
// splits each token line on tabs and keeps integer-ID rows only.

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Row = std::vector<std::string>;  // the 10 columns
using Block = std::vector<Row>;

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Row split_tabs(const std::string& line) {
  Row out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool all_digits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

inline std::vector<Block> split_conllu(const std::string& text) {
  // pass 1: raw line blocks
  std::vector<std::vector<std::string>> raw(1);
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!raw.back().empty()) raw.emplace_back();
    } else {
      raw.back().push_back(line);
    }
  }
  // pass 2: keep token rows with plain integer IDs
  std::vector<Block> blocks;
  for (const auto& lines : raw) {
    Block b;
    for (const auto& l : lines) {
      if (l[0] == '#') continue;
      Row r = split_tabs(l);
      if (!all_digits(r[0])) continue;
      b.push_back(r);
    }
    if (!b.empty()) blocks.push_back(b);
  }
  return blocks;
}

// (head, dependent, label) read straight from the HEAD and DEPREL columns,
// root edges excluded.
using Triple = std::tuple<int, int, std::string>;

inline std::vector<Triple> column_edges(const Block& b) {
  std::vector<Triple> out;
  for (const auto& r : b) {
    const int head = std::stoi(r[6]);
    if (head == 0) continue;
    out.emplace_back(head, std::stoi(r[0]), r[7]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
