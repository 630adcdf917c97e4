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

// treedet sweep     SNR sweep on a builtin or file topology, CSV out.
// treedet design    one design run on a topology + model file pair.
// treedet oracle    exhaustive optimum of a small topology + model pair.
// treedet validate  oracle/consistency/descent self-check.
//
// Exit status: 0 success, 1 validation failure, 2 configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treedet/treedet.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw treedet::Error(treedet::ErrorCode::kBadConfig, "cannot write " + path);
  out << text;
}

// Tables are printed with messages and inputs counted from 1.
void print_tables(const treedet::TreeNetwork& net, const treedet::StrategySet& s) {
  for (treedet::NodeId m : net.non_fc_nodes()) {
    const auto& df = *s[m.value];
    std::cout << "node " << m.value << ":";
    for (std::size_t y = 0; y < df.input_space().size(); ++y) std::cout << ' ' << df[y] + 1;
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design of quantizers for tree-structured detection networks"};
  app.require_subcommand(1);

  treedet::ExperimentConfig sweep_cfg;
  std::optional<int> uniform_rate;
  std::string sweep_out, sweep_dump;
  auto* sweep = app.add_subcommand("sweep", "SNR sweep, one CSV row per point");
  sweep->add_option("--topology", sweep_cfg.topology, "tree22, parallel4, or a topology JSON file");
  sweep->add_option("--rl", sweep_cfg.leaf_rate, "leaf link rate in bits");
  sweep->add_option("--rr", sweep_cfg.relay_rate, "relay link rate in bits");
  sweep->add_option("--rate", uniform_rate, "set both link rates");
  sweep->add_option("--snr", sweep_cfg.snr_db, "SNR values in dB")
      ->delimiter(',')
      ->required();
  sweep->add_option("--priors", sweep_cfg.priors)->delimiter(',');
  sweep->add_option("--bins", sweep_cfg.bins, "observation cells per leaf");
  sweep->add_option("--half-range", sweep_cfg.half_range, "discretization range");
  sweep->add_option("--restarts", sweep_cfg.restarts);
  sweep->add_option("--seed", sweep_cfg.seed);
  sweep->add_option("--threads", sweep_cfg.threads, "0 = hardware concurrency");
  sweep->add_option("--out", sweep_out, "CSV path, stdout if omitted");
  sweep->add_option("--dump-strategies", sweep_dump, "write designed tables as JSON");

  std::string topo_path, model_path, design_dump;
  treedet::DesignConfig design_cfg;
  design_cfg.restarts = 10;
  auto* design = app.add_subcommand("design", "design one network from JSON files");
  design->add_option("--topology", topo_path)->required();
  design->add_option("--model", model_path)->required();
  design->add_option("--restarts", design_cfg.restarts);
  design->add_option("--seed", design_cfg.seed);
  design->add_option("--max-cycles", design_cfg.max_cycles);
  design->add_option("--dump-strategies", design_dump);

  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum of a small network");
  oracle->add_option("--topology", topo_path)->required();
  oracle->add_option("--model", model_path)->required();

  treedet::ValidationOptions val_opt;
  auto* validate = app.add_subcommand("validate", "run the self-check suites");
  validate->add_option("--instances", val_opt.instances);
  validate->add_option("--seeds", val_opt.descent_seeds);
  validate->add_option("--seed", val_opt.seed);
  validate->add_flag("--corrupt-transitions", val_opt.corrupt_transitions,
                     "collapse relay matrices across hypotheses (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sweep) {
      if (uniform_rate) sweep_cfg.leaf_rate = sweep_cfg.relay_rate = *uniform_rate;
      const auto rows = treedet::run_sweep(sweep_cfg);
      write_text(sweep_out, treedet::sweep_csv(rows));
      if (!sweep_dump.empty()) {
        const auto net = treedet::experiment_network(sweep_cfg);
        write_text(sweep_dump, treedet::sweep_strategies_json(net, sweep_cfg, rows).dump(2) + "\n");
      }
      return kExitOk;
    }
    if (*design) {
      const auto net = treedet::load_topology(topo_path);
      const auto model = treedet::load_model(model_path, net);
      const auto res = treedet::cyclic_design(
          net, model, treedet::initial_strategies(net, model, design_cfg.seed), design_cfg);
      std::printf("pe %.12e\nlog10_pe %.6f\ncycles %d\nrestart_best %d\n", res.final_pe,
                  std::log10(res.final_pe), res.cycles_run, res.restart_index);
      print_tables(net, res.strategies);
      if (!design_dump.empty()) {
        treedet::Json meta{{"seed", design_cfg.seed}, {"pe", res.final_pe}};
        write_text(design_dump, treedet::strategies_to_json(net, res.strategies, meta).dump(2) + "\n");
      }
      return kExitOk;
    }
    if (*oracle) {
      const auto net = treedet::load_topology(topo_path);
      const auto model = treedet::load_model(model_path, net);
      const auto best = treedet::exhaustive_optimal(net, model);
      std::printf("pe %.12e\n", best.pe);
      print_tables(net, best.strategies);
      return kExitOk;
    }
    if (*validate) {
      const auto report = treedet::run_validation(val_opt);
      for (const auto& s : report.suites) {
        std::printf("%-24s %s  checks=%zu failures=%zu%s%s\n", s.name.c_str(),
                    s.passed() ? "PASS" : "FAIL", s.checks, s.failures,
                    s.first_failure.empty() ? "" : "  first: ", s.first_failure.c_str());
      }
      return report.passed() ? kExitOk : kExitValidation;
    }
  } catch (const treedet::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
