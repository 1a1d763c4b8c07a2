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

// Dependency graphs at the five enhancement levels.
//
//   Unlabeled < Simplified < Basic < Enhanced < EnhancedPP
//
// Unlabeled, Simplified and Basic share the basic tree's (head, dependent)
// structure. Enhanced comes either from the DEPS column or from a small rule
// engine (case/mark augmentation, conjunct propagation, controlled
// subjects). EnhancedPP is read from the DEPS column only.

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "depemb/common.hpp"
#include "depemb/conllu.hpp"
#include "depemb/scheme.hpp"

namespace depemb {

inline constexpr std::string_view kUnlabeled = "\xE2\x88\x85";  // U+2205

struct DepEdge {
  int head = 0;
  int dependent = 0;
  std::string label;

  friend bool operator==(const DepEdge&, const DepEdge&) = default;
  friend auto operator<=>(const DepEdge& a, const DepEdge& b) {
    return std::tie(a.dependent, a.head, a.label) <=>
           std::tie(b.dependent, b.head, b.label);
  }
};

using EdgeList = std::vector<DepEdge>;

enum class EnhancementLevel { Unlabeled, Simplified, Basic, Enhanced, EnhancedPP };

inline constexpr std::array<EnhancementLevel, 5> kAllLevels = {
    EnhancementLevel::Unlabeled, EnhancementLevel::Simplified,
    EnhancementLevel::Basic, EnhancementLevel::Enhanced,
    EnhancementLevel::EnhancedPP};

inline std::string_view to_string(EnhancementLevel level) {
  switch (level) {
    case EnhancementLevel::Unlabeled:
      return "unlabeled";
    case EnhancementLevel::Simplified:
      return "simplified";
    case EnhancementLevel::Basic:
      return "basic";
    case EnhancementLevel::Enhanced:
      return "enhanced";
    case EnhancementLevel::EnhancedPP:
      return "enhancedpp";
  }
  return "?";
}

inline EnhancementLevel parse_level(std::string_view name) {
  const std::string lower = strings::to_lower(name);
  for (auto level : kAllLevels) {
    if (lower == to_string(level)) return level;
  }
  if (lower == "enhanced++") return EnhancementLevel::EnhancedPP;
  throw ConfigError("unknown level '" + std::string(name) +
                    "' (valid: unlabeled, simplified, basic, enhanced, "
                    "enhancedpp)");
}

enum class EnhanceMode { FromAnnotation, RuleEngine };

inline EnhanceMode parse_enhance_mode(std::string_view name) {
  const std::string lower = strings::to_lower(name);
  if (lower == "annotation" || lower == "from-annotation") {
    return EnhanceMode::FromAnnotation;
  }
  if (lower == "rules" || lower == "rule-engine") return EnhanceMode::RuleEngine;
  throw ConfigError("unknown enhance mode '" + std::string(name) +
                    "' (valid: annotation, rules)");
}

inline std::string_view to_string(EnhanceMode mode) {
  return mode == EnhanceMode::FromAnnotation ? "annotation" : "rules";
}

struct EnhanceOptions {
  EnhanceMode mode = EnhanceMode::RuleEngine;
  // Selects the label templates: `nsubj:xsubj` (universal) or `xsubj`
  // (stanford) for controlled subjects.
  SchemeId scheme = SchemeId::Universal;
  // Copy a conjunct's governor edge to its sibling conjuncts (one level).
  bool propagate_conjuncts = true;
  // Stanford only: rewrite prep(h, p) + pobj(p, o) into prep_p(h, o).
  bool collapse_prepositions = false;
};

// Thrown for a sentence that cannot be brought to the requested level.
// Callers typically collect these per sentence instead of aborting a run.
class SentenceError : public DataError {
 public:
  SentenceError(std::string sentence_id, const std::string& what)
      : DataError(sentence_id.empty() ? what
                                      : "sentence " + sentence_id + ": " + what),
        sentence_id_(std::move(sentence_id)) {}
  const std::string& sentence_id() const { return sentence_id_; }

 private:
  std::string sentence_id_;
};

// One edge per non-root token, in token order.
inline EdgeList basic_graph(const DepSentence& s) {
  EdgeList edges;
  edges.reserve(s.tokens.size());
  for (const auto& t : s.tokens) {
    if (t.head == 0) continue;
    edges.push_back({t.head, t.index, t.deprel});
  }
  return edges;
}

inline EdgeList strip_labels(EdgeList edges) {
  for (auto& e : edges) e.label = std::string(kUnlabeled);
  return edges;
}

inline EdgeList simplify_graph(EdgeList edges, const LabelScheme& scheme) {
  for (auto& e : edges) e.label = scheme.simplify(e.label);
  return edges;
}

// The DEPS column as an edge list. Root entries (`0:root`) are included;
// edges headed by empty nodes are not.
inline EdgeList annotation_graph(const DepSentence& s) {
  EdgeList edges;
  for (const auto& t : s.tokens) {
    for (const auto& e : t.enhanced_edges) {
      if (e.empty_sub != 0) continue;
      edges.push_back({e.head, t.index, e.label});
    }
  }
  return edges;
}

namespace graph_detail {

inline bool pos_in(const TokenNode& t,
                   std::initializer_list<std::string_view> tags) {
  for (const auto* field : {&t.upos, &t.xpos}) {
    if (!*field) continue;
    for (auto tag : tags) {
      if (**field == tag) return true;
    }
  }
  return false;
}

// Adpositions, subordinators and particles (UPOS or PTB tags).
inline bool is_marker_pos(const TokenNode& t) {
  return pos_in(t, {"ADP", "SCONJ", "PART", "ADV", "IN", "TO", "RP", "RB",
                    "WRB"});
}

inline bool is_adposition_pos(const TokenNode& t) {
  return pos_in(t, {"ADP", "IN", "TO"});
}

inline bool is_coordinator_pos(const TokenNode& t) {
  return pos_in(t, {"CCONJ", "CC"});
}

inline std::string marker_text(const TokenNode& t) {
  if (t.lemma && !t.lemma->empty()) return *t.lemma;
  return strings::to_lower(t.form);
}

inline bool has_subtype(std::string_view label) {
  return label.find(':') != std::string_view::npos;
}

inline bool is_modifier(std::string_view label) {
  const auto base = base_label(label);
  return base == "nmod" || base == "obl" || base == "acl" || base == "advcl";
}

class TreeIndex {
 public:
  explicit TreeIndex(const DepSentence& s) : s_(s), children_(s.size() + 1) {
    for (const auto& t : s.tokens) children_[t.head].push_back(t.index);
  }

  const std::vector<int>& children(int head) const { return children_[head]; }
  const TokenNode& token(int index) const { return s_.token(index); }

  // First child of `head` whose DEPREL is exactly `label` and whose POS
  // satisfies `pos_ok`.
  template <typename Pred>
  std::optional<int> child_with(int head, std::string_view label,
                                Pred pos_ok) const {
    for (int c : children_[head]) {
      const auto& t = s_.token(c);
      if (strings::to_lower(t.deprel) == label && pos_ok(t)) return c;
    }
    return std::nullopt;
  }

  // Marker of `dependent` (case or mark child), with any `fixed` children
  // appended: "because of" -> "because_of".
  std::optional<std::string> marker_of(int dependent) const {
    std::optional<int> m = child_with(dependent, "case", is_marker_pos);
    if (!m) m = child_with(dependent, "mark", is_marker_pos);
    if (!m) return std::nullopt;
    std::string text = marker_text(token(*m));
    for (int c : children_[*m]) {
      if (strings::to_lower(token(c).deprel) == "fixed") {
        text += '_' + marker_text(token(c));
      }
    }
    return text;
  }

 private:
  const DepSentence& s_;
  std::vector<std::vector<int>> children_;
};

inline void require_pos(const DepSentence& s) {
  for (const auto& t : s.tokens) {
    if (!t.upos) {
      throw SentenceError(
          s.sentence_id.value_or(""),
          "token " + std::to_string(t.index) +
              " has no UPOS tag; the rule engine needs POS tags, use "
              "--enhance-mode annotation with a pre-enhanced corpus instead");
    }
  }
}

}  // namespace graph_detail

// Stanford-style preposition collapsing: prep(h, p) + pobj(p, o) becomes
// prep_<p>(h, o), and both original edges are removed.
inline EdgeList collapse_prepositions(const DepSentence& s, EdgeList edges) {
  using namespace graph_detail;
  std::map<int, const DepEdge*> pobj_of;  // preposition -> pobj edge
  for (const auto& e : edges) {
    if (strings::to_lower(e.label) == "pobj") pobj_of.emplace(e.head, &e);
  }
  EdgeList out;
  std::set<int> consumed_pobj;
  for (const auto& e : edges) {
    if (strings::to_lower(e.label) == "prep" &&
        is_adposition_pos(s.token(e.dependent))) {
      if (auto it = pobj_of.find(e.dependent); it != pobj_of.end()) {
        out.push_back({e.head, it->second->dependent,
                       "prep_" + marker_text(s.token(e.dependent))});
        consumed_pobj.insert(e.dependent);
        continue;
      }
    }
    out.push_back(e);
  }
  std::erase_if(out, [&](const DepEdge& e) {
    return strings::to_lower(e.label) == "pobj" &&
           consumed_pobj.count(e.head) > 0;
  });
  return out;
}

// Enhanced graph of `s`.
//
// FromAnnotation returns the DEPS column verbatim. RuleEngine starts from the
// basic tree and applies, in order:
//   R1  modifier edges (nmod, obl, acl, advcl) without a subtype whose
//       dependent has a case/mark child become `label:marker`;
//   R2  conj(a, b) becomes `conj:coordinator`, and a's governor edge is
//       copied to b (one level, never from root/cop/conj/punct edges);
//   R3  xcomp(v, c) with a subject m of v adds nsubj:xsubj(c, m).
// The result is sorted by (dependent, head, label).
inline EdgeList enhance_graph(const DepSentence& s, const EnhanceOptions& opts) {
  using namespace graph_detail;
  if (opts.mode == EnhanceMode::FromAnnotation) {
    if (!s.has_enhanced()) {
      throw SentenceError(s.sentence_id.value_or(""),
                          "no DEPS annotation to read the enhanced graph from");
    }
    return annotation_graph(s);
  }
  require_pos(s);
  const TreeIndex tree(s);
  EdgeList edges = basic_graph(s);
  if (opts.collapse_prepositions && opts.scheme == SchemeId::Stanford) {
    edges = collapse_prepositions(s, std::move(edges));
  }

  // R1
  for (auto& e : edges) {
    if (!is_modifier(e.label) || has_subtype(e.label)) continue;
    if (auto marker = tree.marker_of(e.dependent)) e.label += ':' + *marker;
  }

  // R2
  auto incoming = [&](int dependent) -> const DepEdge* {
    for (const auto& e : edges) {
      if (e.dependent == dependent) return &e;
    }
    return nullptr;
  };
  auto find_coordinator = [&](int first, int conjunct) -> std::optional<int> {
    auto cc = [&](int head) {
      return tree.child_with(head, "cc", is_coordinator_pos);
    };
    if (auto c = cc(conjunct)) return c;
    // "A, B and C": the coordinator hangs off the last conjunct.
    const auto& siblings = tree.children(first);
    for (auto it = siblings.rbegin(); it != siblings.rend(); ++it) {
      if (*it == conjunct) continue;
      if (base_label(strings::to_lower(tree.token(*it).deprel)) != "conj") {
        continue;
      }
      if (auto c = cc(*it)) return c;
    }
    return cc(first);  // Stanford attaches cc to the first conjunct
  };
  EdgeList added;
  const std::size_t basic_count = edges.size();
  for (std::size_t i = 0; i < basic_count; ++i) {
    DepEdge& e = edges[i];
    if (strings::to_lower(e.label) != "conj") continue;
    const int first = e.head;
    const int conjunct = e.dependent;
    if (auto c = find_coordinator(first, conjunct)) {
      e.label += ':' + marker_text(tree.token(*c));
    }
    if (!opts.propagate_conjuncts) continue;
    const DepEdge* gov = incoming(first);
    if (gov == nullptr || gov->head == 0) continue;
    const auto gov_base = strings::to_lower(base_label(gov->label));
    if (gov_base == "conj" || gov_base == "cop" || gov_base == "root" ||
        gov_base == "punct") {
      continue;
    }
    std::string label = gov->label;
    if (is_modifier(label)) {
      // The second conjunct keeps its own marker if it has one.
      if (auto marker = tree.marker_of(conjunct)) {
        label = std::string(base_label(label)) + ':' + *marker;
      }
    }
    added.push_back({gov->head, conjunct, std::move(label)});
  }
  for (auto& e : added) {
    const bool present = std::any_of(edges.begin(), edges.end(), [&](auto& x) {
      return x.head == e.head && x.dependent == e.dependent;
    });
    if (!present && e.head != e.dependent) edges.push_back(std::move(e));
  }

  // R3
  const std::string xsubj_label =
      opts.scheme == SchemeId::Stanford ? "xsubj" : "nsubj:xsubj";
  auto has_subject = [&](int head) {
    return std::any_of(edges.begin(), edges.end(), [&](const DepEdge& x) {
      if (x.head != head) return false;
      const auto b = strings::to_lower(base_label(x.label));
      return b == "nsubj" || b == "csubj" || b == "xsubj" || b == "nsubjpass";
    });
  };
  EdgeList controlled;
  for (const auto& e : edges) {
    if (strings::to_lower(base_label(e.label)) != "xcomp") continue;
    if (has_subject(e.dependent)) continue;
    for (const auto& x : edges) {
      if (x.head != e.head) continue;
      const auto b = strings::to_lower(base_label(x.label));
      if (b != "nsubj" && b != "nsubjpass") continue;
      if (x.dependent == e.dependent) continue;
      controlled.push_back({e.dependent, x.dependent, xsubj_label});
    }
  }
  for (auto& e : controlled) edges.push_back(std::move(e));

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

inline EdgeList enhance_graph(const DepSentence& s, EnhanceMode mode) {
  EnhanceOptions opts;
  opts.mode = mode;
  return enhance_graph(s, opts);
}

inline EdgeList enhancedpp_graph(const DepSentence& s) {
  if (!s.has_enhanced()) {
    throw SentenceError(s.sentence_id.value_or(""),
                        "no Enhanced++ annotation in the DEPS column");
  }
  return annotation_graph(s);
}

// The graph for `level`. Errors from the enhanced levels propagate as
// SentenceError.
inline EdgeList apply_level(const DepSentence& s, EnhancementLevel level,
                            const LabelScheme& scheme,
                            const EnhanceOptions& opts = {}) {
  switch (level) {
    case EnhancementLevel::Unlabeled:
      return strip_labels(basic_graph(s));
    case EnhancementLevel::Simplified:
      return simplify_graph(basic_graph(s), scheme);
    case EnhancementLevel::Basic:
      if (opts.collapse_prepositions && scheme.id() == SchemeId::Stanford) {
        return collapse_prepositions(s, basic_graph(s));
      }
      return basic_graph(s);
    case EnhancementLevel::Enhanced: {
      EnhanceOptions o = opts;
      if (scheme.id() != SchemeId::Custom) o.scheme = scheme.id();
      return enhance_graph(s, o);
    }
    case EnhancementLevel::EnhancedPP:
      return enhancedpp_graph(s);
  }
  return {};
}

// Rewrites `s` so that its columns carry the graph of `level`: DEPREL holds
// the level's basic-tree labels (Unlabeled/Simplified) and DEPS holds
// the level's full graph including the root entry.
inline DepSentence materialize_level(const DepSentence& s,
                                     EnhancementLevel level,
                                     const LabelScheme& scheme,
                                     const EnhanceOptions& opts = {}) {
  DepSentence out = s;
  if (level == EnhancementLevel::EnhancedPP ||
      (level == EnhancementLevel::Enhanced &&
       opts.mode == EnhanceMode::FromAnnotation)) {
    // Already materialised in the DEPS column; validate presence only.
    (void)apply_level(s, level, scheme, opts);
    return out;
  }
  EdgeList edges = apply_level(s, level, scheme, opts);
  for (auto& t : out.tokens) t.enhanced_edges.clear();
  for (auto& t : out.tokens) {
    if (t.head != 0) continue;
    std::string root_label = t.deprel;
    if (level == EnhancementLevel::Unlabeled) {
      root_label = std::string(kUnlabeled);
    } else if (level == EnhancementLevel::Simplified) {
      root_label = scheme.simplify(t.deprel);
    }
    t.enhanced_edges.push_back({0, 0, root_label});
  }
  for (const auto& e : edges) {
    if (e.dependent < 1 || e.dependent > static_cast<int>(out.size())) continue;
    out.tokens[e.dependent - 1].enhanced_edges.push_back({e.head, 0, e.label});
  }
  for (auto& t : out.tokens) {
    std::sort(t.enhanced_edges.begin(), t.enhanced_edges.end());
  }
  if (level == EnhancementLevel::Unlabeled ||
      level == EnhancementLevel::Simplified) {
    for (auto& t : out.tokens) {
      if (!t.enhanced_edges.empty()) t.deprel = t.enhanced_edges.front().label;
    }
  }
  return out;
}

}  // namespace depemb
