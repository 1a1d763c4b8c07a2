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

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "depemb/eval.hpp"

namespace depemb {

// {embedding: {dataset: {metric: {...}}}}
inline nlohmann::json reports_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::json root = nlohmann::json::object();
  for (const auto& r : reports) {
    nlohmann::json entry = {{"value", r.value},
                            {"n_used", r.n_used},
                            {"n_skipped", r.n_skipped},
                            {"n_oov", r.n_oov},
                            {"zero_vectors", r.zero_vectors}};
    if (!r.per_pos.empty()) {
      nlohmann::json pos = nlohmann::json::object();
      for (const auto& [name, value] : r.per_pos) {
        pos[name] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
      }
      entry["per_pos"] = pos;
    }
    root[r.embedding_id][r.dataset][r.metric] = entry;
  }
  return root;
}

// Plain-text table with one row per embedding:
//   WS353 | Chiarello || Overall | Noun | Adj. | Verb
inline std::string format_report_table(const std::vector<EvalReport>& reports,
                                       const std::vector<std::string>& row_order) {
  struct Row {
    std::optional<double> ws353, chiarello, overall, noun, adj, verb;
  };
  std::map<std::string, Row> rows;
  for (const auto& r : reports) {
    Row& row = rows[r.embedding_id];
    if (r.dataset == "ws353") row.ws353 = r.value;
    if (r.dataset == "chiarello") row.chiarello = r.value;
    if (r.dataset == "simlex999") {
      row.overall = r.value;
      auto get = [&](const char* k) -> std::optional<double> {
        auto it = r.per_pos.find(k);
        return it == r.per_pos.end() ? std::nullopt : it->second;
      };
      row.noun = get("noun");
      row.adj = get("adj");
      row.verb = get("verb");
    }
  }
  auto cell = [](std::optional<double> v) {
    char buf[16];
    if (!v) return std::string("      -");
    std::snprintf(buf, sizeof(buf), "%7.3f", *v);
    return std::string(buf);
  };
  std::size_t width = 10;
  for (const auto& id : row_order) width = std::max(width, id.size());
  std::string out;
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  out += pad("embeddings") + "    WS353 Chiarello |  Overall    Noun    Adj.    Verb\n";
  out += std::string(width, '-') + " ------- --------- | ------- ------- ------- -------\n";
  for (const auto& id : row_order) {
    auto it = rows.find(id);
    if (it == rows.end()) continue;
    const Row& r = it->second;
    out += pad(id) + "  " + cell(r.ws353) + "   " + cell(r.chiarello) + " | " +
           cell(r.overall) + " " + cell(r.noun) + " " + cell(r.adj) + " " +
           cell(r.verb) + "\n";
  }
  return out;
}

}  // namespace depemb
