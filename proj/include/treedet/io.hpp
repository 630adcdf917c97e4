// Copyright 2026 The treedet Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON file formats.
//
// Topology:   {"nodes": [{"id": 0, "kind": "leaf"|"relay"|"fc",
//                          "parent": <id>|null, "rate_bits": <int>,
//                          "obs_size": <int>}, ...]}
//             rate_bits is omitted for the fc, obs_size for non-leaves.
// Model:      {"priors": [...], "leaves": {"<leaf id>": [[row H_0], ...]}}
// Strategies: {"metadata": {...}, "message_base": 0,
//              "strategies": {"<node id>": [table entries...]}}
// Unknown fields are rejected everywhere.

#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "treedet/error.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/propagation.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/topology.hpp"

namespace treedet {

using Json = nlohmann::json;

namespace detail {

inline void reject_unknown_fields(const Json& obj, const std::set<std::string>& allowed,
                                  const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::kBadConfig, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::kBadConfig, where + ": unknown field '" + key + "'");
  }
}

inline std::size_t parse_id(const std::string& key) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(key, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != key.size()) throw Error(ErrorCode::kBadConfig, "bad node id '" + key + "'");
  return static_cast<std::size_t>(v);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadConfig, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kBadConfig, path + ": " + e.what());
  }
}

}  // namespace detail

inline TreeNetwork topology_from_json(const Json& doc) {
  detail::reject_unknown_fields(doc, {"nodes"}, "topology");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(ErrorCode::kBadConfig, "topology needs a 'nodes' array");
  }
  const Json& nodes = doc["nodes"];
  std::vector<NodeSpec> specs(nodes.size());
  std::vector<bool> seen(nodes.size(), false);
  try {
    for (const Json& n : nodes) {
      detail::reject_unknown_fields(n, {"id", "kind", "parent", "rate_bits", "obs_size"}, "node");
      const std::size_t id = n.at("id").get<std::size_t>();
      if (id >= specs.size() || seen[id]) {
        throw Error(ErrorCode::kBadConfig, "node ids must be dense 0..N-1 and unique");
      }
      seen[id] = true;
      NodeSpec& s = specs[id];
      const std::string kind = n.at("kind").get<std::string>();
      if (kind == "leaf") {
        s.kind = NodeKind::kLeaf;
      } else if (kind == "relay") {
        s.kind = NodeKind::kRelay;
      } else if (kind == "fc") {
        s.kind = NodeKind::kFusionCenter;
      } else {
        throw Error(ErrorCode::kBadConfig, "unknown node kind '" + kind + "'");
      }
      if (!n.contains("parent")) throw Error(ErrorCode::kBadConfig, "node needs 'parent'");
      if (!n["parent"].is_null()) s.parent = NodeId{n["parent"].get<std::size_t>()};
      if (s.kind == NodeKind::kFusionCenter) {
        if (n.contains("rate_bits")) throw Error(ErrorCode::kBadConfig, "fc takes no rate_bits");
      } else {
        s.rate_bits = n.at("rate_bits").get<int>();
      }
      if (s.kind == NodeKind::kLeaf) {
        s.obs_size = n.at("obs_size").get<std::size_t>();
      } else if (n.contains("obs_size")) {
        throw Error(ErrorCode::kBadConfig, "obs_size is only valid for leaves");
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("topology: ") + e.what());
  }
  return build_tree(specs);
}

inline Json topology_to_json(const TreeNetwork& net) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const NodeId m{i};
    Json n;
    n["id"] = i;
    switch (net.kind(m)) {
      case NodeKind::kLeaf: n["kind"] = "leaf"; break;
      case NodeKind::kRelay: n["kind"] = "relay"; break;
      case NodeKind::kFusionCenter: n["kind"] = "fc"; break;
    }
    const auto parent = net.successor(m);
    n["parent"] = parent ? Json(parent->value) : Json(nullptr);
    if (!net.is_fusion_center(m)) n["rate_bits"] = net.rate_bits(m);
    if (net.is_leaf(m)) n["obs_size"] = net.obs_size(m);
    nodes.push_back(std::move(n));
  }
  return Json{{"nodes", std::move(nodes)}};
}

inline TreeNetwork load_topology(const std::string& path) {
  return topology_from_json(detail::read_json_file(path));
}

inline HypothesisModel model_from_json(const Json& doc, const TreeNetwork& net) {
  detail::reject_unknown_fields(doc, {"priors", "leaves"}, "model");
  try {
    std::vector<double> priors = doc.at("priors").get<std::vector<double>>();
    std::map<NodeId, PmfTable> pmfs;
    const Json& leaves = doc.at("leaves");
    if (!leaves.is_object()) throw Error(ErrorCode::kBadConfig, "'leaves' must be an object");
    for (const auto& [key, rows] : leaves.items()) {
      const NodeId id{detail::parse_id(key)};
      if (!net.contains(id) || !net.is_leaf(id)) {
        throw Error(ErrorCode::kDimensionMismatch, "node " + key + " is not a leaf");
      }
      pmfs.emplace(id, PmfTable::from_rows(rows.get<std::vector<std::vector<double>>>()));
    }
    return make_model(net, std::move(priors), std::move(pmfs));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("model: ") + e.what());
  }
}

inline HypothesisModel load_model(const std::string& path, const TreeNetwork& net) {
  return model_from_json(detail::read_json_file(path), net);
}

inline Json model_to_json(const HypothesisModel& model) {
  Json leaves = Json::object();
  for (const auto& [id, table] : model.leaf_pmfs) {
    Json rows = Json::array();
    for (std::size_t j = 0; j < table.hypotheses(); ++j) {
      rows.push_back(std::vector<double>(table.row(j).begin(), table.row(j).end()));
    }
    leaves[std::to_string(id.value)] = std::move(rows);
  }
  return Json{{"priors", model.priors}, {"leaves", std::move(leaves)}};
}

inline Json strategies_to_json(const TreeNetwork& net, const StrategySet& strategies,
                               Json metadata = Json::object()) {
  Json tables = Json::object();
  for (NodeId m : net.non_fc_nodes()) {
    const auto& df = strategies.at(m.value);
    if (!df) throw Error(ErrorCode::kMissingStrategy, std::to_string(m.value));
    tables[std::to_string(m.value)] = std::vector<Message>(df->table().begin(), df->table().end());
  }
  return Json{{"metadata", std::move(metadata)}, {"message_base", 0}, {"strategies", std::move(tables)}};
}

inline StrategySet strategies_from_json(const Json& doc, const TreeNetwork& net) {
  detail::reject_unknown_fields(doc, {"metadata", "message_base", "strategies"}, "strategies");
  try {
    const int base = doc.value("message_base", 0);
    StrategySet out(net.size());
    for (const auto& [key, entries] : doc.at("strategies").items()) {
      const NodeId id{detail::parse_id(key)};
      if (!net.contains(id) || net.is_fusion_center(id)) {
        throw Error(ErrorCode::kBadConfig, "no decision function for node " + key);
      }
      std::vector<Message> table;
      for (const Json& e : entries) {
        const long long v = e.get<long long>() - base;
        if (v < 0) throw Error(ErrorCode::kIndexOutOfRange, "message below base");
        table.push_back(static_cast<Message>(v));
      }
      out[id.value] = DecisionFunction(InputSpace(net.input_dims(id)), net.alphabet_size(id),
                                       std::move(table));
    }
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("strategies: ") + e.what());
  }
}

}  // namespace treedet
