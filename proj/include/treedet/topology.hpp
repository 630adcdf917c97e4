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

// Directed tree networks of leaves, relays and a single fusion center.
//
// Information flows from every node along a unique path to the fusion center
// (FC). Every non-FC node sends a message over an error-free link of
// `rate_bits` bits, so its output alphabet has 2^rate_bits symbols. The input
// coordinates of a relay (or of the FC) are its immediate predecessors in
// ascending id order; that order is the mixed-radix digit order used by the
// quantizer, propagation and fusion code.

#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treedet/error.hpp"

namespace treedet {

struct NodeId {
  std::size_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

enum class NodeKind { kLeaf, kRelay, kFusionCenter };

// Largest accepted link rate. 2^16 symbols is far beyond anything the
// exhaustive-table representation can handle anyway.
inline constexpr int kMaxRateBits = 16;

// One entry per node; the node's id is its position in the list passed to
// build_tree().
struct NodeSpec {
  NodeKind kind = NodeKind::kLeaf;
  std::optional<NodeId> parent;
  int rate_bits = 0;         // ignored for the FC
  std::size_t obs_size = 0;  // leaves only
};

class TreeNetwork {
 public:
  std::size_t size() const { return kinds_.size(); }
  NodeId fusion_center() const { return fc_; }

  bool contains(NodeId m) const { return m.value < size(); }

  NodeKind kind(NodeId m) const {
    check(m);
    return kinds_[m.value];
  }
  bool is_leaf(NodeId m) const { return kind(m) == NodeKind::kLeaf; }
  bool is_relay(NodeId m) const { return kind(m) == NodeKind::kRelay; }
  bool is_fusion_center(NodeId m) const { return check(m), m == fc_; }

  // Immediate successor; empty for the FC.
  std::optional<NodeId> successor(NodeId m) const {
    check(m);
    return parents_[m.value];
  }

  int rate_bits(NodeId m) const {
    check_not_fc(m);
    return rates_[m.value];
  }

  // ||M_i|| = 2^R_i.
  std::size_t alphabet_size(NodeId m) const {
    check_not_fc(m);
    return std::size_t{1} << rates_[m.value];
  }

  // ||X_l||; zero for non-leaves.
  std::size_t obs_size(NodeId m) const {
    check(m);
    return obs_sizes_[m.value];
  }

  // I_m in ascending id order.
  const std::vector<NodeId>& immediate_predecessors(NodeId m) const {
    check(m);
    return children_[m.value];
  }

  // S_m: m followed by its successors, excluding the FC.
  std::vector<NodeId> successor_chain(NodeId m) const {
    check_not_fc(m);
    std::vector<NodeId> chain;
    for (NodeId cur = m; cur != fc_; cur = *parents_[cur.value]) {
      chain.push_back(cur);
    }
    return chain;
  }

  // ls(m): the member of I_f through which m's messages reach the FC.
  NodeId last_successor(NodeId m) const { return successor_chain(m).back(); }

  // Nodes of the sub-tree rooted at m, ascending.
  std::vector<NodeId> subtree_nodes(NodeId m) const {
    check(m);
    std::vector<NodeId> out;
    std::vector<NodeId> stack{m};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      stack.pop_back();
      out.push_back(cur);
      for (NodeId c : children_[cur.value]) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Nodes sorted by height (longest path down to a leaf), ties by id. Every
  // node appears after all of its predecessors and the FC comes last.
  const std::vector<NodeId>& evaluation_order() const { return order_; }

  std::vector<NodeId> leaves() const { return of_kind(NodeKind::kLeaf); }
  std::vector<NodeId> relays() const { return of_kind(NodeKind::kRelay); }

  std::vector<NodeId> non_fc_nodes() const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (NodeId{i} != fc_) out.push_back(NodeId{i});
    }
    return out;
  }

  // Cardinalities of the input coordinates: {||X_l||} for a leaf, the
  // predecessor alphabets (ascending id) for a relay or the FC.
  std::vector<std::size_t> input_dims(NodeId m) const {
    if (is_leaf(m)) return {obs_sizes_[m.value]};
    std::vector<std::size_t> dims;
    for (NodeId p : children_[m.value]) dims.push_back(alphabet_size(p));
    return dims;
  }

 private:
  friend TreeNetwork build_tree(std::span<const NodeSpec> specs);

  void check(NodeId m) const {
    if (!contains(m)) {
      throw Error(ErrorCode::kUnknownNode,
                  "node " + std::to_string(m.value) + " not in network");
    }
  }
  void check_not_fc(NodeId m) const {
    check(m);
    if (m == fc_) throw Error(ErrorCode::kIsFusionCenter, "operation undefined for the FC");
  }

  std::vector<NodeId> of_kind(NodeKind k) const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (kinds_[i] == k) out.push_back(NodeId{i});
    }
    return out;
  }

  std::vector<NodeKind> kinds_;
  std::vector<std::optional<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> rates_;
  std::vector<std::size_t> obs_sizes_;
  std::vector<NodeId> order_;
  NodeId fc_;
};

inline TreeNetwork build_tree(std::span<const NodeSpec> specs) {
  const std::size_t n = specs.size();
  if (n == 0) throw Error(ErrorCode::kMalformedTopology, "empty network");

  std::optional<NodeId> root;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSpec& s = specs[i];
    if (!s.parent) {
      if (root) throw Error(ErrorCode::kMultipleRoots, "more than one node without a parent");
      root = NodeId{i};
    } else if (s.parent->value >= n) {
      throw Error(ErrorCode::kDanglingParent, "node " + std::to_string(i) + " has parent " +
                                                  std::to_string(s.parent->value));
    } else if (s.parent->value == i) {
      throw Error(ErrorCode::kCycleDetected, "node " + std::to_string(i) + " is its own parent");
    }
  }
  if (!root) throw Error(ErrorCode::kCycleDetected, "no root: every node has a parent");
  if (specs[root->value].kind != NodeKind::kFusionCenter) {
    throw Error(ErrorCode::kMalformedTopology, "the parentless node must be the fusion center");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i != root->value && specs[i].kind == NodeKind::kFusionCenter) {
      throw Error(ErrorCode::kMultipleRoots, "more than one fusion center");
    }
  }

  // Every parent walk must reach the root within n steps.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i;
    std::size_t steps = 0;
    while (specs[cur].parent) {
      cur = specs[cur].parent->value;
      if (++steps > n) {
        throw Error(ErrorCode::kCycleDetected, "node " + std::to_string(i) + " lies on a cycle");
      }
    }
  }

  TreeNetwork net;
  net.fc_ = *root;
  net.kinds_.resize(n);
  net.parents_.resize(n);
  net.children_.resize(n);
  net.rates_.assign(n, 0);
  net.obs_sizes_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSpec& s = specs[i];
    net.kinds_[i] = s.kind;
    net.parents_[i] = s.parent;
    if (s.parent) net.children_[s.parent->value].push_back(NodeId{i});
    if (s.kind != NodeKind::kFusionCenter) {
      if (s.rate_bits <= 0) {
        throw Error(ErrorCode::kZeroRate, "node " + std::to_string(i) + " has nonpositive rate");
      }
      if (s.rate_bits > kMaxRateBits) {
        throw Error(ErrorCode::kMalformedTopology,
                    "node " + std::to_string(i) + " rate exceeds " + std::to_string(kMaxRateBits));
      }
      net.rates_[i] = s.rate_bits;
    }
    if (s.kind == NodeKind::kLeaf) {
      if (s.obs_size == 0) {
        throw Error(ErrorCode::kMalformedTopology,
                    "leaf " + std::to_string(i) + " has empty observation space");
      }
      net.obs_sizes_[i] = s.obs_size;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (net.kinds_[i] == NodeKind::kLeaf && !net.children_[i].empty()) {
      throw Error(ErrorCode::kLeafWithPredecessors,
                  "leaf " + std::to_string(i) + " has immediate predecessors");
    }
    if (net.kinds_[i] != NodeKind::kLeaf && net.children_[i].empty()) {
      throw Error(ErrorCode::kMalformedTopology,
                  "non-leaf node " + std::to_string(i) + " has no predecessors");
    }
  }

  // The FC is an ancestor of every node, so it alone has the maximal height.
  std::vector<std::size_t> height(n, 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (NodeId c : net.children_[i]) {
        if (height[i] < height[c.value] + 1) {
          height[i] = height[c.value] + 1;
          changed = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) net.order_.push_back(NodeId{i});
  std::stable_sort(net.order_.begin(), net.order_.end(), [&](NodeId a, NodeId b) {
    return height[a.value] < height[b.value];
  });
  return net;
}

inline TreeNetwork build_tree(const std::vector<NodeSpec>& specs) {
  return build_tree(std::span<const NodeSpec>(specs));
}

}  // namespace treedet
