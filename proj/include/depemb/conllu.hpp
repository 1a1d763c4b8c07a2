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

// CoNLL-U reading and writing.
//
// A sentence keeps everything needed to write it back unchanged: comment
// lines, the ten token columns, and multiword-token / empty-node lines as
// opaque side records. Only the syntactic words (integer IDs) become
// TokenNodes; side records never take part in context extraction.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <istream>
#include <iterator>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "depemb/common.hpp"

namespace depemb {

// One entry of the DEPS column. `empty_sub` is non-zero when the head is an
// empty node such as `8.1`; those edges are kept for round-trip only.
struct EnhancedEdge {
  int head = 0;
  int empty_sub = 0;
  std::string label;

  friend bool operator==(const EnhancedEdge&, const EnhancedEdge&) = default;
  friend auto operator<=>(const EnhancedEdge& a, const EnhancedEdge& b) {
    return std::tie(a.head, a.empty_sub, a.label) <=>
           std::tie(b.head, b.empty_sub, b.label);
  }
};

struct TokenNode {
  int index = 0;
  std::string form;
  std::optional<std::string> lemma;
  std::optional<std::string> upos;
  std::optional<std::string> xpos;
  std::optional<std::string> feats;
  int head = 0;
  std::string deprel;
  std::vector<EnhancedEdge> enhanced_edges;  // sorted by (head, sub, label)
  std::optional<std::string> misc;

  friend bool operator==(const TokenNode&, const TokenNode&) = default;
};

// A multiword-token range line (`3-4`) or empty node (`8.1`), stored verbatim.
// `tokens_before` is the number of syntactic words that precede it.
struct SideRecord {
  int tokens_before = 0;
  std::string line;

  friend bool operator==(const SideRecord&, const SideRecord&) = default;
};

struct DepSentence {
  std::optional<std::string> sentence_id;
  std::vector<std::string> comments;  // without the trailing newline
  std::vector<TokenNode> tokens;
  std::vector<SideRecord> side_records;

  std::size_t size() const { return tokens.size(); }
  // 1-based access.
  const TokenNode& token(int index) const { return tokens.at(index - 1); }
  bool has_enhanced() const {
    for (const auto& t : tokens) {
      if (!t.enhanced_edges.empty()) return true;
    }
    return false;
  }

  friend bool operator==(const DepSentence&, const DepSentence&) = default;
};

struct ParseError {
  std::size_t line = 0;  // 1-based line where the problem was found
  std::string sentence_id;
  std::string message;

  std::string describe() const {
    std::string out = "line " + std::to_string(line);
    if (!sentence_id.empty()) out += " (sentence " + sentence_id + ")";
    return out + ": " + message;
  }
};

using ParseResult = std::variant<DepSentence, ParseError>;

// Returns a diagnostic when `s` breaks a DepSentence invariant: contiguous
// indices, heads in range, a single root, no cycles, and DEPS heads that
// address a token of the sentence or the root.
inline std::optional<std::string> validate(const DepSentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const TokenNode& t = s.tokens[i];
    if (t.index != i + 1) {
      return "token indices are not contiguous at position " +
             std::to_string(i + 1) + " (found " + std::to_string(t.index) +
             ")";
    }
    if (t.head < 0 || t.head > n) {
      return "head " + std::to_string(t.head) + " of token " +
             std::to_string(t.index) + " is out of range";
    }
    if (t.head == t.index) {
      return "token " + std::to_string(t.index) + " is its own head";
    }
    if (t.deprel.empty()) {
      return "token " + std::to_string(t.index) + " has an empty DEPREL";
    }
    if (t.head == 0) ++roots;
    for (const auto& e : t.enhanced_edges) {
      if (e.head < 0 || e.head > n) {
        return "DEPS head " + std::to_string(e.head) + " of token " +
               std::to_string(t.index) + " is out of range";
      }
      if (e.label.empty()) {
        return "DEPS entry of token " + std::to_string(t.index) +
               " has an empty label";
      }
    }
  }
  if (n > 0 && roots != 1) {
    return "expected exactly one root, found " + std::to_string(roots);
  }
  // Walk up from every token; a path longer than n means a cycle.
  for (int i = 1; i <= n; ++i) {
    int cur = i;
    int steps = 0;
    while (cur != 0) {
      cur = s.tokens[cur - 1].head;
      if (++steps > n) {
        return "basic tree contains a cycle through token " +
               std::to_string(i);
      }
    }
  }
  return std::nullopt;
}

namespace conllu_detail {

inline std::optional<std::string> opt_field(std::string_view v) {
  if (v == "_") return std::nullopt;
  return std::string(v);
}

inline std::string_view field_or_blank(const std::optional<std::string>& v) {
  return v ? std::string_view(*v) : std::string_view("_");
}

// Parses `h:label|h:label`. Returns an error message on malformed input.
inline std::optional<std::string> parse_deps(std::string_view column,
                                             std::vector<EnhancedEdge>& out) {
  out.clear();
  if (column == "_") return std::nullopt;
  for (std::string_view item : strings::split(column, '|')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 == item.size()) {
      return "malformed DEPS entry '" + std::string(item) + "'";
    }
    std::string_view head_text = item.substr(0, colon);
    EnhancedEdge edge;
    edge.label = std::string(item.substr(colon + 1));
    const std::size_t dot = head_text.find('.');
    if (dot == std::string_view::npos) {
      auto h = strings::parse_int<int>(head_text);
      if (!h) return "non-integer DEPS head '" + std::string(head_text) + "'";
      edge.head = *h;
    } else {
      auto h = strings::parse_int<int>(head_text.substr(0, dot));
      auto sub = strings::parse_int<int>(head_text.substr(dot + 1));
      if (!h || !sub || *sub <= 0) {
        return "malformed DEPS head '" + std::string(head_text) + "'";
      }
      edge.head = *h;
      edge.empty_sub = *sub;
    }
    out.push_back(std::move(edge));
  }
  std::sort(out.begin(), out.end());
  return std::nullopt;
}

inline std::optional<std::string> sent_id_from_comment(std::string_view line) {
  // "# sent_id = abc"
  std::string_view body = line.substr(1);
  body = strings::trim(body);
  constexpr std::string_view key = "sent_id";
  if (body.substr(0, key.size()) != key) return std::nullopt;
  body.remove_prefix(key.size());
  body = strings::trim(body);
  if (body.empty() || body.front() != '=') return std::nullopt;
  body.remove_prefix(1);
  return std::string(strings::trim(body));
}

}  // namespace conllu_detail

// Lazily reads one sentence block at a time from a stream. Errors are
// reported per sentence; the reader resynchronises at the next blank line.
class ConlluReader {
 public:
  explicit ConlluReader(std::istream& in) : in_(&in) {}

  std::optional<ParseResult> next() {
    std::string line;
    DepSentence sentence;
    std::optional<ParseError> error;
    bool in_block = false;
    std::size_t block_start = 0;

    auto finish = [&]() -> std::optional<ParseResult> {
      if (error) {
        if (error->sentence_id.empty() && sentence.sentence_id) {
          error->sentence_id = *sentence.sentence_id;
        }
        return ParseResult(std::move(*error));
      }
      if (auto problem = validate(sentence)) {
        return ParseResult(ParseError{block_start,
                                      sentence.sentence_id.value_or(""),
                                      *problem});
      }
      return ParseResult(std::move(sentence));
    };

    while (std::getline(*in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (strings::trim(line).empty()) {
        if (in_block && (!sentence.tokens.empty() || error)) return finish();
        // Comment-only or empty block: nothing to yield.
        sentence = DepSentence{};
        in_block = false;
        continue;
      }
      if (!in_block) {
        in_block = true;
        block_start = line_no_;
      }
      if (error) continue;  // skip the remainder of a broken block
      if (line.front() == '#') {
        if (auto id = conllu_detail::sent_id_from_comment(line)) {
          sentence.sentence_id = *id;
        }
        sentence.comments.push_back(line);
        continue;
      }
      if (auto problem = parse_token_line(line, sentence)) {
        error = ParseError{line_no_, sentence.sentence_id.value_or(""),
                           *problem};
      }
    }
    if (in_block && (!sentence.tokens.empty() || error)) return finish();
    return std::nullopt;
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = ParseResult;
    using difference_type = std::ptrdiff_t;
    using pointer = ParseResult*;
    using reference = ParseResult&;

    iterator() = default;
    explicit iterator(ConlluReader* reader) : reader_(reader) { advance(); }

    reference operator*() { return *current_; }
    pointer operator->() { return &*current_; }
    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.reader_ == b.reader_;
    }

   private:
    void advance() {
      current_ = reader_->next();
      if (!current_) reader_ = nullptr;
    }
    ConlluReader* reader_ = nullptr;
    std::optional<ParseResult> current_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  std::optional<std::string> parse_token_line(const std::string& line,
                                              DepSentence& sentence) {
    const auto cols = strings::split(line, '\t');
    if (cols.size() != 10) {
      return "expected 10 tab-separated columns, found " +
             std::to_string(cols.size());
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos ||
        id.find('.') != std::string_view::npos) {
      sentence.side_records.push_back(
          {static_cast<int>(sentence.tokens.size()), line});
      return std::nullopt;
    }
    auto index = strings::parse_int<int>(id);
    if (!index || *index < 1) return "invalid token ID '" + std::string(id) + "'";
    auto head = strings::parse_int<int>(cols[6]);
    if (!head) {
      return "non-integer HEAD '" + std::string(cols[6]) + "' for token " +
             std::string(id);
    }
    TokenNode t;
    t.index = *index;
    t.form = std::string(cols[1]);
    t.lemma = conllu_detail::opt_field(cols[2]);
    t.upos = conllu_detail::opt_field(cols[3]);
    t.xpos = conllu_detail::opt_field(cols[4]);
    t.feats = conllu_detail::opt_field(cols[5]);
    t.head = *head;
    t.deprel = cols[7] == "_" ? std::string() : std::string(cols[7]);
    if (auto problem = conllu_detail::parse_deps(cols[8], t.enhanced_edges)) {
      return *problem + " for token " + std::string(id);
    }
    t.misc = conllu_detail::opt_field(cols[9]);
    sentence.tokens.push_back(std::move(t));
    return std::nullopt;
  }

  std::istream* in_;
  std::size_t line_no_ = 0;
};

// Eagerly parses a whole stream. Sentences that fail are reported through
// `errors` when provided.
inline std::vector<DepSentence> read_conllu(
    std::istream& in, std::vector<ParseError>* errors = nullptr) {
  std::vector<DepSentence> out;
  ConlluReader reader(in);
  for (auto& result : reader) {
    if (auto* s = std::get_if<DepSentence>(&result)) {
      out.push_back(std::move(*s));
    } else if (errors) {
      errors->push_back(std::get<ParseError>(result));
    }
  }
  return out;
}

inline std::vector<DepSentence> read_conllu_string(
    std::string_view text, std::vector<ParseError>* errors = nullptr) {
  std::istringstream in{std::string(text)};
  return read_conllu(in, errors);
}

inline std::string format_deps(const std::vector<EnhancedEdge>& edges) {
  if (edges.empty()) return "_";
  std::vector<EnhancedEdge> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(sorted[i].head);
    if (sorted[i].empty_sub) out += '.' + std::to_string(sorted[i].empty_sub);
    out += ':';
    out += sorted[i].label;
  }
  return out;
}

inline void write_token_line(std::ostream& out, const TokenNode& t) {
  using conllu_detail::field_or_blank;
  out << t.index << '\t' << t.form << '\t' << field_or_blank(t.lemma) << '\t'
      << field_or_blank(t.upos) << '\t' << field_or_blank(t.xpos) << '\t'
      << field_or_blank(t.feats) << '\t' << t.head << '\t'
      << (t.deprel.empty() ? std::string_view("_") : std::string_view(t.deprel))
      << '\t' << format_deps(t.enhanced_edges) << '\t'
      << field_or_blank(t.misc) << '\n';
}

inline void write_conllu(std::ostream& out, const DepSentence& s) {
  bool has_id_comment = false;
  for (const auto& c : s.comments) {
    if (conllu_detail::sent_id_from_comment(c)) has_id_comment = true;
  }
  if (s.sentence_id && !has_id_comment) {
    out << "# sent_id = " << *s.sentence_id << '\n';
  }
  for (const auto& c : s.comments) out << c << '\n';
  std::size_t side = 0;
  for (std::size_t i = 0; i <= s.tokens.size(); ++i) {
    while (side < s.side_records.size() &&
           s.side_records[side].tokens_before == static_cast<int>(i)) {
      out << s.side_records[side].line << '\n';
      ++side;
    }
    if (i < s.tokens.size()) write_token_line(out, s.tokens[i]);
  }
  out << '\n';
}

template <typename Range>
std::string serialize_conllu(const Range& sentences) {
  std::ostringstream out;
  for (const DepSentence& s : sentences) write_conllu(out, s);
  return out.str();
}

}  // namespace depemb
