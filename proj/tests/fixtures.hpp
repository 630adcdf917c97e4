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


// Shared networks and small helpers for the unit tests.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "treedet/treedet.hpp"

namespace treedet::testing {

// Seventeen-node example tree: nodes n1..n17 get ids 0..16, FC = 17.
// FC <- {n1, n7, n11}; n1 <- {n2, n3, n4}; n4 <- {n5, n6};
// n7 <- {n8, n9, n10}; n11 <- {n12, n13, n14}; n14 <- {n15, n16, n17}.
inline TreeNetwork example17() {
  const std::vector<std::optional<std::size_t>> parent = {
      17, 0, 0, 0, 3, 3, 17, 6, 6, 6, 17, 10, 10, 10, 13, 13, 13, std::nullopt};
  const std::vector<std::size_t> relays = {0, 3, 6, 10, 13};
  std::vector<NodeSpec> specs(parent.size());
  for (std::size_t i = 0; i < parent.size(); ++i) {
    NodeSpec& s = specs[i];
    if (!parent[i]) {
      s.kind = NodeKind::kFusionCenter;
      continue;
    }
    s.parent = NodeId{*parent[i]};
    s.rate_bits = 1;
    const bool relay = std::find(relays.begin(), relays.end(), i) != relays.end();
    s.kind = relay ? NodeKind::kRelay : NodeKind::kLeaf;
    if (!relay) s.obs_size = 2;
  }
  return build_tree(specs);
}

inline std::vector<NodeId> ids(std::initializer_list<std::size_t> v) {
  std::vector<NodeId> out;
  for (std::size_t x : v) out.push_back(NodeId{x});
  return out;
}

inline DecisionFunction and_gate() {
  return DecisionFunction(InputSpace({2, 2}), 2, {0, 0, 0, 1});
}

inline DecisionFunction identity_map(std::size_t n) {
  std::vector<Message> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<Message>(i);
  return DecisionFunction(InputSpace({n}), n, std::move(t));
}

// One leaf wired straight to the FC.
inline TreeNetwork single_leaf(std::size_t obs, int rate) {
  return build_tree({NodeSpec{NodeKind::kLeaf, NodeId{1}, rate, obs},
                     NodeSpec{NodeKind::kFusionCenter, std::nullopt, 0, 0}});
}

inline HypothesisModel binary_model(const TreeNetwork& net, const std::vector<std::vector<double>>& rows,
                                    std::vector<double> priors = {0.5, 0.5}) {
  std::map<NodeId, PmfTable> pmfs;
  for (NodeId l : net.leaves()) pmfs.emplace(l, PmfTable::from_rows(rows));
  return make_model(net, std::move(priors), std::move(pmfs));
}

}  // namespace treedet::testing
