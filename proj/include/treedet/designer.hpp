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

// Cyclic person-by-person design of all node decision functions.
//
// Each node update holds every other node fixed, extracts the node's
// restricted model and re-optimizes its table jointly with the (implicit)
// MAP fusion rule. Because the restricted error equals the network error for
// the current strategies, no update can increase the network error.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "treedet/error.hpp"
#include "treedet/fusion.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/propagation.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/topology.hpp"

namespace treedet {

// A reassignment must lower the error by more than this to be accepted.
inline constexpr double kImprovementEps = 1e-14;

// Error of a restricted model under single-input reassignments, maintained
// incrementally. Per output w it caches
//   c_w = sum_v max_j pi_j P_j(v) P_j(w),
// so Pe = 1 - sum_w c_w, and moving input y from z to z' only touches the
// columns w where the channel rows of z and z' differ.
class RestrictedObjective {
 public:
  RestrictedObjective(const RestrictedModel& rm, const DecisionFunction& gamma)
      : rm_(rm), hyps_(rm.priors.size()), zs_(rm.target_output_card),
        ws_(rm.channel.to_card()), vs_(rm.v_pmf.symbols()) {
    if (gamma.input_space().size() != rm.y_pmf.symbols() || gamma.output_card() != zs_ ||
        rm.channel.from_card() != zs_ || rm.v_pmf.hypotheses() != hyps_ ||
        rm.y_pmf.hypotheses() != hyps_ || rm.channel.hypotheses() != hyps_) {
      throw Error(ErrorCode::kDimensionMismatch, "decision function does not fit restricted model");
    }
    side_.resize(vs_ * hyps_);
    for (std::size_t v = 0; v < vs_; ++v) {
      for (std::size_t j = 0; j < hyps_; ++j) side_[v * hyps_ + j] = rm.priors[j] * rm.v_pmf(j, v);
    }
    reset(gamma);
  }

  void reset(const DecisionFunction& gamma) {
    mass_.assign(hyps_ * zs_, 0.0);
    for (std::size_t y = 0; y < rm_.y_pmf.symbols(); ++y) {
      for (std::size_t j = 0; j < hyps_; ++j) mass_[j * zs_ + gamma[y]] += rm_.y_pmf(j, y);
    }
    pw_.assign(ws_ * hyps_, 0.0);
    for (std::size_t w = 0; w < ws_; ++w) {
      for (std::size_t j = 0; j < hyps_; ++j) {
        double s = 0.0;
        for (std::size_t z = 0; z < zs_; ++z) s += rm_.channel(j, w, z) * mass_[j * zs_ + z];
        pw_[w * hyps_ + j] = s;
      }
    }
    contrib_.resize(ws_);
    for (std::size_t w = 0; w < ws_; ++w) contrib_[w] = column_value(&pw_[w * hyps_]);
  }

  double error() const {
    double correct = 0.0;
    for (double c : contrib_) correct += c;
    return 1.0 - correct;
  }

  // True if y carries no probability under any hypothesis.
  bool is_null_input(std::size_t y) const {
    for (std::size_t j = 0; j < hyps_; ++j) {
      if (rm_.y_pmf(j, y) != 0.0) return false;
    }
    return true;
  }

  // Change in error if input y is moved from `from` to `to`.
  double delta(std::size_t y, Message from, Message to) {
    if (from == to) return 0.0;
    double d = 0.0;
    scratch_.resize(hyps_);
    for (std::size_t w = 0; w < ws_; ++w) {
      bool touched = false;
      for (std::size_t j = 0; j < hyps_; ++j) {
        const double step = rm_.y_pmf(j, y) * (rm_.channel(j, w, to) - rm_.channel(j, w, from));
        scratch_[j] = pw_[w * hyps_ + j] + step;
        touched = touched || step != 0.0;
      }
      if (touched) d -= column_value(scratch_.data()) - contrib_[w];
    }
    return d;
  }

  void move(std::size_t y, Message from, Message to) {
    if (from == to) return;
    for (std::size_t j = 0; j < hyps_; ++j) {
      mass_[j * zs_ + from] -= rm_.y_pmf(j, y);
      mass_[j * zs_ + to] += rm_.y_pmf(j, y);
    }
    for (std::size_t w = 0; w < ws_; ++w) {
      bool touched = false;
      for (std::size_t j = 0; j < hyps_; ++j) {
        const double step = rm_.y_pmf(j, y) * (rm_.channel(j, w, to) - rm_.channel(j, w, from));
        pw_[w * hyps_ + j] += step;
        touched = touched || step != 0.0;
      }
      if (touched) contrib_[w] = column_value(&pw_[w * hyps_]);
    }
  }

 private:
  double column_value(const double* pw) const {
    double s = 0.0;
    for (std::size_t v = 0; v < vs_; ++v) {
      const double* a = &side_[v * hyps_];
      double best = 0.0;
      for (std::size_t j = 0; j < hyps_; ++j) best = std::max(best, a[j] * pw[j]);
      s += best;
    }
    return s;
  }

  const RestrictedModel& rm_;
  std::size_t hyps_, zs_, ws_, vs_;
  std::vector<double> side_;     // [v][j] = pi_j P_j(v)
  std::vector<double> mass_;     // [j][z] = P_j(z)
  std::vector<double> pw_;       // [w][j] = P_j(w)
  std::vector<double> contrib_;  // [w]
  std::vector<double> scratch_;
};

// Coordinate descent over inputs: sweep y ascending, move y to the message
// with the largest error decrease (smallest message on ties; the incumbent
// stays unless some move beats it by kImprovementEps), until a full sweep
// changes nothing or `inner_max_passes` sweeps ran.
inline DecisionFunction optimize_node_in_restricted_model(const RestrictedModel& rm,
                                                          const DecisionFunction& gamma_init,
                                                          int inner_max_passes) {
  DecisionFunction gamma = gamma_init;
  RestrictedObjective obj(rm, gamma);
  const std::size_t ys = rm.y_pmf.symbols();
  const std::size_t zs = rm.target_output_card;
  for (int pass = 0; pass < inner_max_passes; ++pass) {
    if (pass > 0) obj.reset(gamma);
    bool changed = false;
    for (std::size_t y = 0; y < ys; ++y) {
      if (obj.is_null_input(y)) continue;
      const Message current = gamma[y];
      Message best = current;
      double best_delta = std::numeric_limits<double>::infinity();
      for (Message z = 0; z < zs; ++z) {
        if (z == current) continue;
        const double d = obj.delta(y, current, z);
        if (d < best_delta) {
          best_delta = d;
          best = z;
        }
      }
      if (best != current && best_delta < -kImprovementEps) {
        obj.move(y, current, best);
        gamma.assign(y, best);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return gamma;
}

// True if no single-input reassignment lowers the restricted error by more
// than kImprovementEps.
inline bool is_locally_optimal(const RestrictedModel& rm, const DecisionFunction& gamma) {
  RestrictedObjective obj(rm, gamma);
  for (std::size_t y = 0; y < rm.y_pmf.symbols(); ++y) {
    if (obj.is_null_input(y)) continue;
    for (Message z = 0; z < rm.target_output_card; ++z) {
      if (obj.delta(y, gamma[y], z) < -kImprovementEps) return false;
    }
  }
  return true;
}

struct DesignConfig {
  std::vector<NodeId> node_schedule;  // empty: default_schedule()
  int max_cycles = 100;
  double pe_tolerance = 1e-12;
  int restarts = 1;
  std::uint64_t seed = 0;
  int inner_max_passes = 50;
};

struct DesignResult {
  StrategySet strategies;
  double initial_pe = 0.0;
  std::vector<double> pe_trace;  // after every node update
  double final_pe = 0.0;
  int cycles_run = 0;
  int restart_index = 0;
  std::vector<double> restart_pes;  // final error of every restart run
};

// Leaves ascending, then relays ascending.
inline std::vector<NodeId> default_schedule(const TreeNetwork& net) {
  std::vector<NodeId> s = net.leaves();
  for (NodeId r : net.relays()) s.push_back(r);
  return s;
}

inline std::uint64_t node_seed(std::uint64_t seed, NodeId m) {
  return seed + 0x9E3779B97F4A7C15ull * (m.value + 1);
}

inline void randomize_relays(const TreeNetwork& net, StrategySet& strategies, std::uint64_t seed) {
  for (NodeId r : net.relays()) {
    strategies[r.value] =
        init_random(InputSpace(net.input_dims(r)), net.alphabet_size(r), node_seed(seed, r));
  }
}

// Threshold initialization for binary leaves (random tables otherwise) and
// random relays.
inline StrategySet initial_strategies(const TreeNetwork& net, const HypothesisModel& model,
                                      std::uint64_t seed) {
  StrategySet s(net.size());
  for (NodeId l : net.leaves()) {
    if (model.num_hypotheses() == 2) {
      s[l.value] = init_leaf_threshold(model, l, net.rate_bits(l));
    } else {
      s[l.value] =
          init_random(InputSpace(net.input_dims(l)), net.alphabet_size(l), node_seed(seed, l));
    }
  }
  randomize_relays(net, s, seed);
  return s;
}

namespace detail {

inline DesignResult run_cycles(const TreeNetwork& net, const HypothesisModel& model,
                               StrategySet strategies, const std::vector<NodeId>& schedule,
                               const DesignConfig& cfg) {
  DesignResult res;
  Propagator prop(net, model, strategies);
  double pe = network_error_probability(prop);
  res.initial_pe = pe;
  for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    const double cycle_start = pe;
    for (NodeId m : schedule) {
      const RestrictedModel rm = prop.restricted_model(m);
      DecisionFunction updated =
          optimize_node_in_restricted_model(rm, prop.strategy(m), cfg.inner_max_passes);
      if (updated != *strategies[m.value]) {
        strategies[m.value] = std::move(updated);
        prop.invalidate(m);
      }
      pe = network_error_probability(prop);
      res.pe_trace.push_back(pe);
    }
    res.cycles_run = cycle;
    if (cycle_start - pe < cfg.pe_tolerance) break;
  }
  res.final_pe = pe;
  res.strategies = std::move(strategies);
  return res;
}

}  // namespace detail

// Restart 0 starts from `init`; restart r > 0 replaces the relay tables with
// fresh random ones seeded by cfg.seed + r. Networks without relays run once,
// since every restart would repeat restart 0. Returns the best run (earliest
// on ties) with all restart errors in restart_pes.
inline DesignResult cyclic_design(const TreeNetwork& net, const HypothesisModel& model,
                                  const StrategySet& init, const DesignConfig& cfg) {
  std::vector<NodeId> schedule = cfg.node_schedule.empty() ? default_schedule(net)
                                                           : cfg.node_schedule;
  {
    std::set<NodeId> seen(schedule.begin(), schedule.end());
    const auto expected = net.non_fc_nodes();
    if (seen.size() != schedule.size() || seen.size() != expected.size() ||
        !std::equal(seen.begin(), seen.end(), expected.begin())) {
      throw Error(ErrorCode::kBadConfig, "schedule must list every non-FC node exactly once");
    }
  }
  if (cfg.max_cycles < 1 || cfg.restarts < 1 || cfg.inner_max_passes < 1 ||
      !(cfg.pe_tolerance >= 0.0)) {
    throw Error(ErrorCode::kBadConfig, "cycles, restarts and passes must be positive");
  }
  if (init.size() != net.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "strategy set size != network size");
  }
  for (NodeId m : net.non_fc_nodes()) {
    if (!init[m.value]) throw Error(ErrorCode::kMissingStrategy, std::to_string(m.value));
  }

  const int runs = net.relays().empty() ? 1 : cfg.restarts;
  DesignResult best;
  std::vector<double> finals;
  for (int r = 0; r < runs; ++r) {
    StrategySet start = init;
    if (r > 0) randomize_relays(net, start, cfg.seed + static_cast<std::uint64_t>(r));
    DesignResult res = detail::run_cycles(net, model, std::move(start), schedule, cfg);
    res.restart_index = r;
    finals.push_back(res.final_pe);
    if (r == 0 || res.final_pe < best.final_pe) best = std::move(res);
  }
  best.restart_pes = std::move(finals);
  return best;
}

// Re-checks that every node is a fixed point of its single-input sweep.
inline bool audit_local_optimality(const TreeNetwork& net, const HypothesisModel& model,
                                   const StrategySet& strategies) {
  Propagator prop(net, model, strategies);
  for (NodeId m : net.non_fc_nodes()) {
    if (!is_locally_optimal(prop.restricted_model(m), prop.strategy(m))) return false;
  }
  return true;
}

// Two relays feeding the FC, each fed by exactly two leaves, all links 1 bit,
// every leaf on the same observation axis.
inline bool is_two_symmetric_two_uniform(const TreeNetwork& net) {
  const auto& top = net.immediate_predecessors(net.fusion_center());
  if (top.size() != 2) return false;
  std::size_t obs = 0;
  for (NodeId r : top) {
    if (!net.is_relay(r) || net.rate_bits(r) != 1) return false;
    const auto& leaves = net.immediate_predecessors(r);
    if (leaves.size() != 2) return false;
    for (NodeId l : leaves) {
      if (!net.is_leaf(l) || net.rate_bits(l) != 1) return false;
      if (obs != 0 && net.obs_size(l) != obs) return false;
      obs = net.obs_size(l);
    }
  }
  return true;
}

// Common leaf threshold, AND relays, MAP fusion; the threshold is swept over
// all cut points (threshold_grid == 0) or `threshold_grid` evenly spaced
// cuts. Returns the smallest network error.
inline double tay_baseline(const TreeNetwork& net, const HypothesisModel& model,
                           std::size_t threshold_grid = 0) {
  if (!is_two_symmetric_two_uniform(net)) {
    throw Error(ErrorCode::kWrongTopology, "AND baseline needs the 2-symmetric 2-uniform tree");
  }
  if (model.num_hypotheses() != 2) {
    throw Error(ErrorCode::kUnsupportedHypothesisCount, "AND baseline is binary only");
  }
  const std::size_t bins = net.obs_size(net.leaves().front());
  if (bins < 2) throw Error(ErrorCode::kBadBinCount, "need at least one cut point");

  std::vector<std::size_t> cuts;
  if (threshold_grid == 0) {
    for (std::size_t c = 1; c < bins; ++c) cuts.push_back(c);
  } else {
    for (std::size_t i = 1; i <= threshold_grid; ++i) {
      const std::size_t c = (i * bins) / (threshold_grid + 1);
      if (c >= 1 && c < bins) cuts.push_back(c);
    }
  }
  if (cuts.empty()) throw Error(ErrorCode::kBadBinCount, "threshold grid has no interior cut");

  StrategySet s(net.size());
  for (NodeId r : net.relays()) {
    s[r.value] = DecisionFunction(InputSpace({2, 2}), 2, {0, 0, 0, 1});
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c : cuts) {
    std::vector<Message> table(bins, 0);
    std::fill(table.begin() + static_cast<std::ptrdiff_t>(c), table.end(), 1);
    for (NodeId l : net.leaves()) s[l.value] = DecisionFunction(InputSpace({bins}), 2, table);
    best = std::min(best, network_error_probability(net, model, s));
  }
  return best;
}

}  // namespace treedet
