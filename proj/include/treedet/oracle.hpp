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

// Brute-force ground truth for small instances. Nothing here uses the
// propagation shortcuts: joint outcomes are enumerated and messages are
// pushed through the tables one observation tuple at a time.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "treedet/error.hpp"
#include "treedet/fusion.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/propagation.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/topology.hpp"

namespace treedet {

// Strategy sets whose errors differ by less than this count as tied.
inline constexpr double kOracleTieTolerance = 1e-14;

struct OracleBudget {
  std::uint64_t max_total_tables = std::uint64_t{1} << 24;
  std::uint64_t max_joint_outcomes = std::uint64_t{1} << 20;
};

namespace detail {

// a * b, saturating at `cap + 1`.
inline std::uint64_t capped_mul(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  if (a == 0 || b == 0) return 0;
  if (a > (cap + 1) / b + 1) return cap + 1;
  return std::min(a * b, cap + 1);
}

inline std::uint64_t joint_outcome_count(const TreeNetwork& net, std::uint64_t cap) {
  std::uint64_t n = 1;
  for (NodeId l : net.leaves()) n = capped_mul(n, net.obs_size(l), cap);
  return n;
}

// Per-hypothesis joint PMF of the FC input vector, by enumeration of every
// leaf observation tuple. If `strategies` is null the leaves' raw
// observations are fused directly (centralized detection).
inline PmfTable enumerate_fc_inputs(const TreeNetwork& net, const HypothesisModel& model,
                                    const StrategySet* strategies,
                                    const OracleBudget& budget, InputSpace& fc_space) {
  if (joint_outcome_count(net, budget.max_joint_outcomes) > budget.max_joint_outcomes) {
    throw Error(ErrorCode::kBudgetExceeded, "joint observation space too large");
  }
  const std::vector<NodeId> leaves = net.leaves();
  const std::size_t hyps = model.num_hypotheses();

  std::vector<std::size_t> obs_dims;
  for (NodeId l : leaves) obs_dims.push_back(net.obs_size(l));
  const InputSpace obs_space(obs_dims);

  if (strategies) {
    for (NodeId m : net.non_fc_nodes()) {
      const auto& df = (*strategies)[m.value];
      if (!df) throw Error(ErrorCode::kMissingStrategy, std::to_string(m.value));
      if (df->input_space().dims() != net.input_dims(m) ||
          df->output_card() != net.alphabet_size(m)) {
        throw Error(ErrorCode::kDimensionMismatch, "strategy shape at " + std::to_string(m.value));
      }
    }
    fc_space = InputSpace(net.input_dims(net.fusion_center()));
  } else {
    fc_space = obs_space;
  }

  PmfTable joint(hyps, fc_space.size());
  std::vector<std::size_t> message(net.size(), 0);
  std::vector<std::size_t> coords;
  for (std::size_t x = 0; x < obs_space.size(); ++x) {
    std::size_t fc_index = x;
    if (strategies) {
      for (std::size_t k = 0; k < leaves.size(); ++k) message[leaves[k].value] = obs_space.digit(x, k);
      for (NodeId m : net.evaluation_order()) {
        if (net.is_fusion_center(m)) break;
        std::size_t in;
        if (net.is_leaf(m)) {
          in = message[m.value];
        } else {
          coords.clear();
          for (NodeId p : net.immediate_predecessors(m)) coords.push_back(message[p.value]);
          in = (*strategies)[m.value]->input_space().flatten(coords);
        }
        message[m.value] = (*strategies)[m.value]->apply(in);
      }
      coords.clear();
      for (NodeId p : net.immediate_predecessors(net.fusion_center())) {
        coords.push_back(message[p.value]);
      }
      fc_index = fc_space.flatten(coords);
    }
    for (std::size_t j = 0; j < hyps; ++j) {
      double p = 1.0;
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        p *= model.leaf_pmf(leaves[k])(j, obs_space.digit(x, k));
      }
      joint(j, fc_index) += p;
    }
  }
  return joint;
}

}  // namespace detail

// Bayes error of the MAP FC computed from the full joint observation space.
inline double joint_bruteforce_pe(const TreeNetwork& net, const HypothesisModel& model,
                                  const StrategySet& strategies, const OracleBudget& budget = {}) {
  InputSpace fc_space;
  const PmfTable joint = detail::enumerate_fc_inputs(net, model, &strategies, budget, fc_space);
  return map_error(model.priors, joint);
}

// Bayes error of a detector that sees every raw leaf observation.
inline double centralized_map_pe(const TreeNetwork& net, const HypothesisModel& model,
                                 const OracleBudget& budget = {}) {
  InputSpace space;
  const PmfTable joint = detail::enumerate_fc_inputs(net, model, nullptr, budget, space);
  return map_error(model.priors, joint);
}

struct OracleResult {
  double pe = 1.0;
  StrategySet strategies;
};

// Global minimum of the network error over every deterministic table
// assignment. Assignments are visited in lexicographic order of the
// concatenated tables (ascending node id); the first minimizer is kept.
inline OracleResult exhaustive_optimal(const TreeNetwork& net, const HypothesisModel& model,
                                       const OracleBudget& budget = {}) {
  const std::vector<NodeId> nodes = net.non_fc_nodes();
  std::uint64_t total = 1;
  for (NodeId m : nodes) {
    const std::size_t card = net.alphabet_size(m);
    const std::size_t inputs = InputSpace(net.input_dims(m)).size();
    for (std::size_t i = 0; i < inputs; ++i) total = detail::capped_mul(total, card, budget.max_total_tables);
  }
  if (total > budget.max_total_tables) {
    throw Error(ErrorCode::kBudgetExceeded, "strategy space exceeds oracle budget");
  }

  std::vector<std::vector<Message>> tables;
  for (NodeId m : nodes) tables.emplace_back(InputSpace(net.input_dims(m)).size(), 0);

  StrategySet s(net.size());
  OracleResult best;
  best.pe = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const NodeId m = nodes[k];
      s[m.value] = DecisionFunction(InputSpace(net.input_dims(m)), net.alphabet_size(m), tables[k]);
    }
    const double pe = network_error_probability(net, model, s);
    if (pe < best.pe - kOracleTieTolerance) {
      best.pe = pe;
      best.strategies = s;
    }
    // Odometer: the last entry of the last table is the least significant.
    bool carry = true;
    for (std::size_t k = nodes.size(); carry && k-- > 0;) {
      const Message card = static_cast<Message>(net.alphabet_size(nodes[k]));
      for (std::size_t i = tables[k].size(); carry && i-- > 0;) {
        if (++tables[k][i] < card) {
          carry = false;
        } else {
          tables[k][i] = 0;
        }
      }
    }
    if (carry) break;
  }
  return best;
}

}  // namespace treedet
