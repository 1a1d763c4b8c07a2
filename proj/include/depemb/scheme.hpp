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

#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depemb/common.hpp"

namespace depemb {

enum class SchemeId { Stanford, Universal, Custom };

inline std::string_view to_string(SchemeId id) {
  switch (id) {
    case SchemeId::Stanford:
      return "stanford";
    case SchemeId::Universal:
      return "universal";
    case SchemeId::Custom:
      return "custom";
  }
  return "?";
}

inline SchemeId parse_scheme_id(std::string_view name) {
  const std::string lower = strings::to_lower(name);
  if (lower == "stanford" || lower == "sd") return SchemeId::Stanford;
  if (lower == "universal" || lower == "ud") return SchemeId::Universal;
  throw ConfigError("unknown scheme '" + std::string(name) +
                    "' (valid: stanford, universal)");
}

// Reduces `nmod:in` to `nmod`.
inline std::string_view base_label(std::string_view label) {
  const std::size_t colon = label.find(':');
  return colon == std::string_view::npos ? label : label.substr(0, colon);
}

// A dependency label inventory with its coarse-class collapse table. Keys are
// stored lowercased; lookup strips any `:subtype` and ignores case. Labels
// missing from the table pass through unchanged.
class LabelScheme {
 public:
  LabelScheme() = default;
  LabelScheme(SchemeId id, std::map<std::string, std::string> table)
      : id_(id), table_(std::move(table)) {}

  SchemeId id() const { return id_; }
  const std::map<std::string, std::string>& table() const { return table_; }

  std::string simplify(std::string_view label) const {
    const std::string key = strings::to_lower(base_label(label));
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    return std::string(label);
  }

  bool lists(std::string_view label) const {
    return table_.count(strings::to_lower(base_label(label))) > 0;
  }

  // Two schemes are equal when their collapse tables are.
  friend bool operator==(const LabelScheme& a, const LabelScheme& b) {
    return a.table_ == b.table_;
  }

 private:
  SchemeId id_ = SchemeId::Custom;
  std::map<std::string, std::string> table_;
};

inline std::string simplify_label(const LabelScheme& scheme,
                                  std::string_view label) {
  return scheme.simplify(label);
}

namespace scheme_detail {

using ClassRows =
    std::vector<std::pair<std::string_view, std::vector<std::string_view>>>;

inline std::map<std::string, std::string> build(const ClassRows& rows) {
  std::map<std::string, std::string> table;
  for (const auto& [cls, labels] : rows) {
    for (auto label : labels) table.emplace(std::string(label), std::string(cls));
  }
  return table;
}

}  // namespace scheme_detail

// Stanford Dependencies collapse table: classes mod, arg, aux, sdep.
inline const LabelScheme& stanford_scheme() {
  static const LabelScheme scheme(
      SchemeId::Stanford,
      scheme_detail::build({
          {"mod",
           {"poss", "prt", "predet", "det", "amod", "tmod", "npadvmod",
            "possessive", "advmod", "quantmod", "preconj", "mark", "vmod",
            "nn", "num", "prep", "appos", "mwe", "mod", "number", "neg",
            "advcl", "rcmod"}},
          {"arg",
           {"agent", "iobj", "dobj", "acomp", "pcomp", "pobj", "ccomp", "arg",
            "subj", "csubj", "obj", "xcomp", "nsubj"}},
          {"aux", {"aux", "cop"}},
          {"sdep", {"xsubj", "sdep"}},
      }));
  return scheme;
}

// Universal Dependencies collapse table: classes core, ncore, nom, coord,
// special, loose, mwe, other.
inline const LabelScheme& universal_scheme() {
  static const LabelScheme scheme(
      SchemeId::Universal,
      scheme_detail::build({
          {"core", {"iobj", "dobj", "ccomp", "csubj", "obj", "xcomp", "nsubj"}},
          {"ncore",
           {"discourse", "cop", "advmod", "dislocated", "vocative", "aux",
            "advcl", "mark", "obl", "expl"}},
          {"nom",
           {"case", "nmod", "acl", "neg", "appos", "det", "amod", "nummod"}},
          {"coord", {"cc", "conj"}},
          {"special", {"goeswith", "reparandum", "orphan"}},
          {"loose", {"parataxis", "list"}},
          {"mwe", {"compound", "mwe", "flat"}},
          {"other", {"punct", "dep", "root"}},
      }));
  return scheme;
}

inline const LabelScheme& builtin_scheme(SchemeId id) {
  if (id == SchemeId::Stanford) return stanford_scheme();
  if (id == SchemeId::Universal) return universal_scheme();
  throw ConfigError("no built-in table for the custom scheme");
}

// Reads a two-column `basic<TAB>class` table. Blank lines and `#` comments
// are ignored. Repeating a label with the same class is accepted.
inline LabelScheme load_custom_map(std::istream& in,
                                   SchemeId id = SchemeId::Custom) {
  std::map<std::string, std::string> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = strings::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto cols = strings::split(body, '\t');
    if (cols.size() != 2 || strings::trim(cols[0]).empty() ||
        strings::trim(cols[1]).empty()) {
      throw DataError("label map line " + std::to_string(line_no) +
                      ": expected 'basic_label<TAB>simplified_class'");
    }
    std::string key = strings::to_lower(strings::trim(cols[0]));
    std::string cls(strings::trim(cols[1]));
    auto [it, inserted] = table.emplace(key, cls);
    if (!inserted && it->second != cls) {
      throw DataError("label map line " + std::to_string(line_no) +
                      ": label '" + key + "' mapped to both '" + it->second +
                      "' and '" + cls + "'");
    }
  }
  return LabelScheme(id, std::move(table));
}

}  // namespace depemb
