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

// SNR-sweep experiment harness and the machinery self-check.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "treedet/designer.hpp"
#include "treedet/error.hpp"
#include "treedet/fusion.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/io.hpp"
#include "treedet/oracle.hpp"
#include "treedet/propagation.hpp"
#include "treedet/random_instance.hpp"
#include "treedet/topology.hpp"

namespace treedet {

// Two relays, each fed by two leaves: ids l1..l4 = 0..3, r1 = 4 (l1, l2),
// r2 = 5 (l3, l4), FC = 6.
inline TreeNetwork make_tree22(int leaf_rate, int relay_rate, std::size_t obs_size) {
  std::vector<NodeSpec> specs(7);
  for (std::size_t l = 0; l < 4; ++l) {
    specs[l] = {NodeKind::kLeaf, NodeId{4 + l / 2}, leaf_rate, obs_size};
  }
  specs[4] = {NodeKind::kRelay, NodeId{6}, relay_rate, 0};
  specs[5] = {NodeKind::kRelay, NodeId{6}, relay_rate, 0};
  specs[6] = {NodeKind::kFusionCenter, std::nullopt, 0, 0};
  return build_tree(specs);
}

// n leaves feeding the FC directly; leaves are 0..n-1, FC = n.
inline TreeNetwork make_parallel(std::size_t n_leaves, int rate, std::size_t obs_size) {
  std::vector<NodeSpec> specs(n_leaves + 1);
  for (std::size_t l = 0; l < n_leaves; ++l) {
    specs[l] = {NodeKind::kLeaf, NodeId{n_leaves}, rate, obs_size};
  }
  specs[n_leaves] = {NodeKind::kFusionCenter, std::nullopt, 0, 0};
  return build_tree(specs);
}

inline bool is_builtin_topology(const std::string& name) {
  return name == "tree22" || name == "parallel4";
}

struct ExperimentConfig {
  std::string topology = "tree22";  // builtin name or topology file path
  int leaf_rate = 1;
  int relay_rate = 1;
  std::vector<double> snr_db;
  std::vector<double> priors{0.5, 0.5};
  std::size_t bins = 400;
  double half_range = 10.0;
  int restarts = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
  std::string topology;
  std::optional<int> leaf_rate;
  std::optional<int> relay_rate;
  double snr_db = 0.0;
  int restart_best = 0;
  int cycles = 0;
  double pe = 0.0;
  std::optional<double> linear_log10_pe;
  std::optional<double> tay_log10_pe;
  std::vector<double> pe_trace;
  StrategySet strategies;
};

inline TreeNetwork experiment_network(const ExperimentConfig& cfg) {
  if (cfg.leaf_rate < 1 || cfg.relay_rate < 1) {
    throw Error(ErrorCode::kBadConfig, "rates must be at least 1");
  }
  if (cfg.topology == "tree22") return make_tree22(cfg.leaf_rate, cfg.relay_rate, cfg.bins);
  if (cfg.topology == "parallel4") return make_parallel(4, cfg.leaf_rate, cfg.bins);
  return load_topology(cfg.topology);
}

// Gaussian antipodal model on every leaf, each discretized into its own
// obs_size cells.
inline HypothesisModel experiment_model(const TreeNetwork& net, const ExperimentConfig& cfg,
                                        double snr_db) {
  std::map<NodeId, PmfTable> pmfs;
  for (NodeId l : net.leaves()) {
    pmfs.emplace(l, discretize_gaussian_antipodal(snr_db, net.obs_size(l), cfg.half_range));
  }
  return make_model(net, cfg.priors, std::move(pmfs));
}

inline SweepRow run_sweep_point(const TreeNetwork& net, const ExperimentConfig& cfg,
                                double snr_db) {
  const HypothesisModel model = experiment_model(net, cfg, snr_db);
  DesignConfig dc;
  dc.restarts = cfg.restarts;
  dc.seed = cfg.seed;
  DesignResult res = cyclic_design(net, model, initial_strategies(net, model, cfg.seed), dc);

  SweepRow row;
  row.topology = cfg.topology;
  row.snr_db = snr_db;
  row.restart_best = res.restart_index;
  row.cycles = res.cycles_run;
  row.pe = res.final_pe;
  row.pe_trace = std::move(res.pe_trace);
  row.strategies = std::move(res.strategies);
  const bool builtin = is_builtin_topology(cfg.topology);
  if (builtin) {
    row.leaf_rate = cfg.leaf_rate;
    if (cfg.topology == "tree22") row.relay_rate = cfg.relay_rate;
    row.linear_log10_pe = std::log10(centralized_linear_pe(snr_db, net.leaves().size()));
  }
  if (cfg.topology == "tree22" && cfg.leaf_rate == 1 && cfg.relay_rate == 1) {
    row.tay_log10_pe = std::log10(tay_baseline(net, model));
  }
  return row;
}

// Runs `count` independent jobs on up to `threads` workers; results keep
// input order. The first exception is rethrown after all workers join.
template <typename Result, typename Job>
std::vector<Result> run_parallel(std::size_t count, std::size_t threads, Job job) {
  std::vector<Result> out(count);
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  if (cfg.snr_db.empty()) throw Error(ErrorCode::kBadConfig, "SNR list is empty");
  if (cfg.restarts < 1) throw Error(ErrorCode::kBadConfig, "restarts must be positive");
  const TreeNetwork net = experiment_network(cfg);
  return run_parallel<SweepRow>(cfg.snr_db.size(), cfg.threads,
                                [&](std::size_t i) { return run_sweep_point(net, cfg, cfg.snr_db[i]); });
}

inline std::string format_number(double x, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "topology,R_l,R_r,snr_db,restart_best,cycles,pe,log10_pe,"
         "baseline_linear_log10_pe,baseline_tay_log10_pe\n";
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  auto opt_log = [](const std::optional<double>& v) {
    return v ? format_number(*v, "%.6f") : std::string();
  };
  for (const SweepRow& r : rows) {
    out << r.topology << ',' << opt_int(r.leaf_rate) << ',' << opt_int(r.relay_rate) << ','
        << format_number(r.snr_db, "%g") << ',' << r.restart_best << ',' << r.cycles << ','
        << format_number(r.pe, "%.12e") << ',' << format_number(std::log10(r.pe), "%.6f") << ','
        << opt_log(r.linear_log10_pe) << ',' << opt_log(r.tay_log10_pe) << '\n';
  }
  return out.str();
}

inline Json sweep_strategies_json(const TreeNetwork& net, const ExperimentConfig& cfg,
                                  const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const SweepRow& r : rows) {
    Json meta{{"topology", cfg.topology}, {"seed", cfg.seed}, {"snr_db", r.snr_db},
              {"pe", r.pe}, {"restart_best", r.restart_best}};
    Json rates = Json::object();
    for (NodeId m : net.non_fc_nodes()) rates[std::to_string(m.value)] = net.rate_bits(m);
    meta["rates"] = std::move(rates);
    out.push_back(strategies_to_json(net, r.strategies, std::move(meta)));
  }
  return out;
}

// --- self-check -----------------------------------------------------------

struct ValidationOptions {
  std::size_t instances = 100;
  std::size_t descent_seeds = 10;
  std::uint64_t seed = 2024;
  OracleBudget budget;
  bool corrupt_transitions = false;  // negative control
};

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool passed() const { return failures == 0 && checks > 0; }
};

struct ValidationReport {
  std::vector<SuiteResult> suites;

  bool passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
  }
};

inline constexpr double kValidationTolerance = 1e-12;

// Replaces every hypothesis' matrix with hypothesis 0's; stays stochastic but
// no longer matches the network.
inline void collapse_hypotheses(TransitionMatrix& t) {
  for (std::size_t j = 1; j < t.hypotheses(); ++j) {
    for (std::size_t m = 0; m < t.to_card(); ++m) {
      for (std::size_t n = 0; n < t.from_card(); ++n) t(j, m, n) = t(0, m, n);
    }
  }
}

inline ValidationReport run_validation(const ValidationOptions& opt = {}) {
  SuiteResult oracle{"oracle-equivalence", 0, 0, {}};
  SuiteResult consistency{"restricted-consistency", 0, 0, {}};
  SuiteResult descent{"monotone-descent", 0, 0, {}};
  auto fail = [](SuiteResult& s, const std::string& msg) {
    if (s.failures++ == 0) s.first_failure = msg;
  };

  for (std::size_t i = 0; i < opt.instances; ++i) {
    const std::uint64_t seed = opt.seed + i;
    const RandomInstance inst = random_instance(seed);
    Propagator prop(inst.net, inst.model, inst.strategies);
    if (opt.corrupt_transitions) prop.set_transition_hook(collapse_hypotheses);
    const double pe = network_error_probability(prop);

    ++oracle.checks;
    const double brute = joint_bruteforce_pe(inst.net, inst.model, inst.strategies, opt.budget);
    if (std::abs(brute - pe) > kValidationTolerance) {
      fail(oracle, "seed " + std::to_string(seed) + ": brute force " + std::to_string(brute) +
                       " vs " + std::to_string(pe));
    }
    for (NodeId m : inst.net.non_fc_nodes()) {
      ++consistency.checks;
      double restricted = 0.0;
      try {
        restricted = restricted_error_probability(prop.restricted_model(m), prop.strategy(m));
      } catch (const Error& e) {
        fail(consistency, "seed " + std::to_string(seed) + ": " + e.what());
        continue;
      }
      if (std::abs(restricted - pe) > kValidationTolerance) {
        fail(consistency, "seed " + std::to_string(seed) + " node " + std::to_string(m.value) +
                              ": restricted " + std::to_string(restricted) + " vs " +
                              std::to_string(pe));
      }
    }
  }

  auto check_trace = [&](const DesignResult& r, const std::string& label) {
    ++descent.checks;
    double prev = r.initial_pe;
    for (double pe : r.pe_trace) {
      if (pe > prev + kValidationTolerance) {
        fail(descent, label + ": error rose from " + std::to_string(prev) + " to " +
                          std::to_string(pe));
        return;
      }
      prev = pe;
    }
  };
  for (std::size_t s = 0; s < opt.descent_seeds; ++s) {
    const std::uint64_t seed = opt.seed + 7919 * (s + 1);
    const RandomInstance inst = random_instance(seed);
    DesignConfig dc;
    dc.seed = seed;
    check_trace(cyclic_design(inst.net, inst.model, inst.strategies, dc),
                "random seed " + std::to_string(seed));
  }
  {
    const TreeNetwork net = make_tree22(1, 1, 64);
    const HypothesisModel model = gaussian_antipodal_model(net, 0.0, 64, 6.0);
    DesignConfig dc;
    dc.seed = opt.seed;
    check_trace(cyclic_design(net, model, initial_strategies(net, model, opt.seed), dc), "tree22");
  }

  return ValidationReport{{oracle, consistency, descent}};
}

}  // namespace treedet
