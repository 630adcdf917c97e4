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

// Hypothesis-conditioned message statistics of a tree network.
//
// Conditioned on H_j, the inputs of every relay are independent, so the PMF
// of a node's output is a sum over the preimage of each message of products
// of predecessor PMFs, computed upward from the leaves. Fixing one input of a
// relay and marginalizing the others gives a column-stochastic transition
// matrix; the matrices along a node's path to the FC compose by ordinary
// matrix products. Together with the PMFs of the node's inputs and of the
// other FC inputs they form the two-node restricted model used to redesign
// that node.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "treedet/error.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/topology.hpp"

namespace treedet {

// One decision function per node id; the FC slot stays empty.
using StrategySet = std::vector<std::optional<DecisionFunction>>;

struct ConditionalPmf {
  NodeId node;
  PmfTable table;  // (j, u) = P_j(u_node = u)
};

// Per-hypothesis column-stochastic matrices: (j, m, n) = P_j(out = m | in = n).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(std::size_t hypotheses, std::size_t to_card, std::size_t from_card)
      : hyps_(hypotheses), to_(to_card), from_(from_card),
        data_(hypotheses * to_card * from_card, 0.0) {}

  static TransitionMatrix identity(std::size_t hypotheses, std::size_t card) {
    TransitionMatrix t(hypotheses, card, card);
    for (std::size_t j = 0; j < hypotheses; ++j) {
      for (std::size_t n = 0; n < card; ++n) t(j, n, n) = 1.0;
    }
    return t;
  }

  std::size_t hypotheses() const { return hyps_; }
  std::size_t to_card() const { return to_; }
  std::size_t from_card() const { return from_; }

  double& operator()(std::size_t j, std::size_t m, std::size_t n) {
    return data_[(j * to_ + m) * from_ + n];
  }
  double operator()(std::size_t j, std::size_t m, std::size_t n) const {
    return data_[(j * to_ + m) * from_ + n];
  }

  bool is_column_stochastic(double tol = kProbabilityTolerance) const {
    for (std::size_t j = 0; j < hyps_; ++j) {
      for (std::size_t n = 0; n < from_; ++n) {
        double sum = 0.0;
        for (std::size_t m = 0; m < to_; ++m) {
          const double p = (*this)(j, m, n);
          if (!(p >= -tol)) return false;
          sum += p;
        }
        if (std::abs(sum - 1.0) > tol) return false;
      }
    }
    return true;
  }

  bool is_identity() const {
    if (to_ != from_) return false;
    for (std::size_t j = 0; j < hyps_; ++j) {
      for (std::size_t m = 0; m < to_; ++m) {
        for (std::size_t n = 0; n < from_; ++n) {
          if ((*this)(j, m, n) != (m == n ? 1.0 : 0.0)) return false;
        }
      }
    }
    return true;
  }

 private:
  std::size_t hyps_ = 0;
  std::size_t to_ = 0;
  std::size_t from_ = 0;
  std::vector<double> data_;
};

// after * before, hypothesis by hypothesis.
inline TransitionMatrix compose(const TransitionMatrix& after, const TransitionMatrix& before) {
  if (after.from_card() != before.to_card() || after.hypotheses() != before.hypotheses()) {
    throw Error(ErrorCode::kDimensionMismatch, "transition matrices do not chain");
  }
  TransitionMatrix out(after.hypotheses(), after.to_card(), before.from_card());
  for (std::size_t j = 0; j < after.hypotheses(); ++j) {
    for (std::size_t m = 0; m < after.to_card(); ++m) {
      for (std::size_t k = 0; k < after.from_card(); ++k) {
        const double a = after(j, m, k);
        if (a == 0.0) continue;
        for (std::size_t n = 0; n < before.from_card(); ++n) out(j, m, n) += a * before(j, k, n);
      }
    }
  }
  return out;
}

// Joint PMF of independent components over their mixed-radix product space,
// first component most significant. An empty list gives the one-point
// distribution.
inline PmfTable product_pmf(const std::vector<const PmfTable*>& parts, std::size_t hypotheses) {
  PmfTable acc(hypotheses, 1);
  for (std::size_t j = 0; j < hypotheses; ++j) acc(j, 0) = 1.0;
  for (const PmfTable* part : parts) {
    if (part->hypotheses() != hypotheses) {
      throw Error(ErrorCode::kDimensionMismatch, "hypothesis count mismatch");
    }
    PmfTable next(hypotheses, acc.symbols() * part->symbols());
    for (std::size_t j = 0; j < hypotheses; ++j) {
      for (std::size_t a = 0; a < acc.symbols(); ++a) {
        for (std::size_t b = 0; b < part->symbols(); ++b) {
          next(j, a * part->symbols() + b) = acc(j, a) * (*part)(j, b);
        }
      }
    }
    acc = std::move(next);
  }
  return acc;
}

// Two-node surrogate for redesigning one node m0 together with the FC:
// node input y, side information v from the other FC inputs, and the
// hypothesis-dependent channel z -> w formed by the relays between m0 and
// the FC.
struct RestrictedModel {
  NodeId node;
  InputSpace y_space;
  PmfTable y_pmf;
  PmfTable v_pmf;
  TransitionMatrix channel;  // to_card = ||M_w||, from_card = ||M_z||
  std::vector<double> priors;
  std::size_t target_output_card = 0;
};

// Memoized evaluator over a fixed (network, model) and a strategy set that
// the caller may mutate between calls, provided every changed node is
// reported through invalidate().
class Propagator {
 public:
  using TransitionHook = std::function<void(TransitionMatrix&)>;

  Propagator(const TreeNetwork& net, const HypothesisModel& model, const StrategySet& strategies)
      : net_(net), model_(model), strategies_(strategies), cache_(net.size()) {
    if (strategies.size() != net.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "strategy set size != network size");
    }
  }

  const TreeNetwork& network() const { return net_; }
  const HypothesisModel& model() const { return model_; }
  std::size_t hypotheses() const { return model_.num_hypotheses(); }

  // Test hook applied to every relay transition matrix after it is built.
  void set_transition_hook(TransitionHook hook) { hook_ = std::move(hook); }

  // Drops cached PMFs of `changed` and every node downstream of it.
  void invalidate(NodeId changed) {
    for (NodeId m : net_.successor_chain(changed)) cache_[m.value].reset();
  }

  void invalidate_all() {
    for (auto& c : cache_) c.reset();
  }

  const DecisionFunction& strategy(NodeId m) const {
    if (net_.is_fusion_center(m)) {
      throw Error(ErrorCode::kIsFusionCenter, "the FC has no stored decision function");
    }
    const auto& df = strategies_[m.value];
    if (!df) {
      throw Error(ErrorCode::kMissingStrategy, "node " + std::to_string(m.value));
    }
    if (df->input_space().dims() != net_.input_dims(m) ||
        df->output_card() != net_.alphabet_size(m)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "decision function shape mismatch at node " + std::to_string(m.value));
    }
    return *df;
  }

  // P_j(u_m) for every hypothesis and message.
  const PmfTable& output_pmf(NodeId m) {
    auto& slot = cache_[m.value];
    if (slot) return *slot;
    const DecisionFunction& df = strategy(m);
    const PmfTable input = input_pmf(m);
    PmfTable out(hypotheses(), df.output_card());
    for (std::size_t j = 0; j < hypotheses(); ++j) {
      for (std::size_t idx = 0; idx < input.symbols(); ++idx) out(j, df[idx]) += input(j, idx);
    }
    slot = std::move(out);
    return *slot;
  }

  // Joint PMF of m's input vector: the observation PMF for a leaf, the
  // product of the predecessors' output PMFs otherwise.
  PmfTable input_pmf(NodeId m) {
    if (net_.is_leaf(m)) return model_.leaf_pmf(m);
    return product_pmf(predecessor_pmfs(m, std::nullopt), hypotheses());
  }

  // Transition matrix of `relay` with respect to its input from `from`; the
  // other inputs are marginalized under their output PMFs.
  TransitionMatrix relay_transition(NodeId relay, NodeId from) {
    if (!net_.is_relay(relay)) {
      throw Error(ErrorCode::kNotAPredecessor, "node " + std::to_string(relay.value) +
                                                   " is not a relay");
    }
    const auto& preds = net_.immediate_predecessors(relay);
    auto it = std::find(preds.begin(), preds.end(), from);
    if (it == preds.end()) {
      throw Error(ErrorCode::kNotAPredecessor, "node " + std::to_string(from.value) +
                                                   " does not feed node " +
                                                   std::to_string(relay.value));
    }
    const std::size_t pos = static_cast<std::size_t>(it - preds.begin());
    const DecisionFunction& df = strategy(relay);
    const InputSpace& space = df.input_space();

    // Joint PMF of the other inputs, indexed by the input index with the
    // fixed digit removed.
    const PmfTable others = product_pmf(predecessor_pmfs(relay, pos), hypotheses());
    const std::size_t stride = space.stride(pos);
    const std::size_t fixed_card = space.dims()[pos];

    TransitionMatrix t(hypotheses(), df.output_card(), fixed_card);
    for (std::size_t idx = 0; idx < space.size(); ++idx) {
      const std::size_t n = (idx / stride) % fixed_card;
      const std::size_t rest = (idx / (stride * fixed_card)) * stride + idx % stride;
      const Message m = df[idx];
      for (std::size_t j = 0; j < hypotheses(); ++j) t(j, m, n) += others(j, rest);
    }
    if (hook_) hook_(t);
    return t;
  }

  // P_j(u_K | u_0) along the path from m0 to ls(m0); identity if m0 feeds
  // the FC directly.
  TransitionMatrix chain(NodeId m0) {
    const std::vector<NodeId> path = net_.successor_chain(m0);
    TransitionMatrix acc = TransitionMatrix::identity(hypotheses(), net_.alphabet_size(m0));
    for (std::size_t l = 1; l < path.size(); ++l) {
      acc = compose(relay_transition(path[l], path[l - 1]), acc);
    }
    if (!acc.is_column_stochastic()) {
      throw Error(ErrorCode::kNumerical, "chain matrix lost stochasticity");
    }
    return acc;
  }

  RestrictedModel restricted_model(NodeId m0) {
    if (net_.is_fusion_center(m0)) {
      throw Error(ErrorCode::kIsFusionCenter, "cannot restrict on the FC");
    }
    RestrictedModel rm;
    rm.node = m0;
    rm.y_space = InputSpace(net_.input_dims(m0));
    rm.y_pmf = input_pmf(m0);

    const NodeId last = net_.last_successor(m0);
    std::vector<const PmfTable*> side;
    for (NodeId p : net_.immediate_predecessors(net_.fusion_center())) {
      if (p != last) side.push_back(&output_pmf(p));
    }
    rm.v_pmf = product_pmf(side, hypotheses());
    rm.channel = chain(m0);
    rm.priors = model_.priors;
    rm.target_output_card = net_.alphabet_size(m0);
    return rm;
  }

 private:
  // Output PMFs of m's predecessors in coordinate order, optionally skipping
  // coordinate `skip`.
  std::vector<const PmfTable*> predecessor_pmfs(NodeId m, std::optional<std::size_t> skip) {
    const auto& preds = net_.immediate_predecessors(m);
    // cache_ is sized once, so these pointers stay valid.
    std::vector<const PmfTable*> out;
    for (std::size_t k = 0; k < preds.size(); ++k) {
      if (skip && *skip == k) continue;
      out.push_back(&output_pmf(preds[k]));
    }
    return out;
  }

  const TreeNetwork& net_;
  const HypothesisModel& model_;
  const StrategySet& strategies_;
  std::vector<std::optional<PmfTable>> cache_;
  TransitionHook hook_;
};

inline ConditionalPmf node_output_pmf(const TreeNetwork& net, const HypothesisModel& model,
                                      const StrategySet& strategies, NodeId m) {
  Propagator prop(net, model, strategies);
  return {m, prop.output_pmf(m)};
}

inline TransitionMatrix relay_transition_matrix(const TreeNetwork& net,
                                                const HypothesisModel& model,
                                                const StrategySet& strategies, NodeId relay,
                                                NodeId in_edge_from) {
  Propagator prop(net, model, strategies);
  return prop.relay_transition(relay, in_edge_from);
}

inline TransitionMatrix chain_matrix(const TreeNetwork& net, const HypothesisModel& model,
                                     const StrategySet& strategies, NodeId m0) {
  Propagator prop(net, model, strategies);
  return prop.chain(m0);
}

inline RestrictedModel build_restricted_model(const TreeNetwork& net,
                                              const HypothesisModel& model,
                                              const StrategySet& strategies, NodeId m0) {
  Propagator prop(net, model, strategies);
  return prop.restricted_model(m0);
}

}  // namespace treedet
