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

// Seeded generator of small random networks, models and strategies for
// property checks against the oracle.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "treedet/hypothesis_model.hpp"
#include "treedet/propagation.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/topology.hpp"

namespace treedet {

struct RandomInstanceOptions {
  std::size_t max_leaves = 4;
  std::size_t max_relays = 2;
  std::size_t min_obs = 2;
  std::size_t max_obs = 4;
  std::size_t max_depth = 3;  // edges on the longest leaf-to-FC path
  int max_rate = 2;
  std::size_t min_hypotheses = 2;
  std::size_t max_hypotheses = 3;
  bool parallel = false;  // all leaves feed the FC directly
  std::size_t num_leaves = 0;  // 0: random in [1, max_leaves]
};

struct RandomInstance {
  TreeNetwork net;
  HypothesisModel model;
  StrategySet strategies;
};

// Portable draws (std distributions differ between standard libraries).
class InstanceRng {
 public:
  explicit InstanceRng(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  std::uint64_t next() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<double> random_distribution(InstanceRng& rng, std::size_t n, double floor) {
  std::vector<double> p(n);
  for (double& x : p) x = floor + rng.uniform();
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return p;
}

inline RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& opt = {}) {
  InstanceRng rng(seed);
  const std::size_t leaves = opt.num_leaves ? opt.num_leaves : rng.between(1, opt.max_leaves);
  const std::size_t relay_cap =
      opt.parallel ? 0 : std::min({opt.max_relays, leaves, opt.max_depth > 1 ? opt.max_depth - 1 : 0});
  const std::size_t relays = relay_cap ? rng.below(relay_cap + 1) : 0;

  // Local numbering: 0 = FC, 1..relays = relays, then leaves.
  struct Proto {
    NodeKind kind;
    std::size_t parent;
    std::size_t depth;
  };
  std::vector<Proto> proto{{NodeKind::kFusionCenter, 0, 0}};
  std::vector<std::size_t> child_count(1 + relays + leaves, 0);
  for (std::size_t r = 0; r < relays; ++r) {
    std::vector<std::size_t> options;
    for (std::size_t k = 0; k < proto.size(); ++k) {
      if (proto[k].depth + 2 <= opt.max_depth) options.push_back(k);
    }
    const std::size_t parent = options[rng.below(options.size())];
    proto.push_back({NodeKind::kRelay, parent, proto[parent].depth + 1});
    ++child_count[parent];
  }
  for (std::size_t l = 0; l < leaves; ++l) {
    std::size_t parent = 0;
    // Childless relays get the first leaves so every relay has an input.
    auto empty = std::find_if(proto.begin() + 1, proto.begin() + 1 + static_cast<std::ptrdiff_t>(relays),
                              [&](const Proto& p) {
                                return child_count[static_cast<std::size_t>(&p - proto.data())] == 0;
                              });
    if (empty != proto.begin() + 1 + static_cast<std::ptrdiff_t>(relays)) {
      parent = static_cast<std::size_t>(empty - proto.begin());
    } else if (!opt.parallel) {
      parent = rng.below(1 + relays);
    }
    proto.push_back({NodeKind::kLeaf, parent, proto[parent].depth + 1});
    ++child_count[parent];
  }

  // Random relabeling so the FC and coordinate orders vary.
  std::vector<std::size_t> label(proto.size());
  std::iota(label.begin(), label.end(), 0);
  for (std::size_t i = label.size(); i > 1; --i) std::swap(label[i - 1], label[rng.below(i)]);

  std::vector<NodeSpec> specs(proto.size());
  for (std::size_t k = 0; k < proto.size(); ++k) {
    NodeSpec& s = specs[label[k]];
    s.kind = proto[k].kind;
    if (k != 0) s.parent = NodeId{label[proto[k].parent]};
    if (s.kind != NodeKind::kFusionCenter) {
      s.rate_bits = static_cast<int>(rng.between(1, static_cast<std::size_t>(opt.max_rate)));
    }
    if (s.kind == NodeKind::kLeaf) s.obs_size = rng.between(opt.min_obs, opt.max_obs);
  }
  TreeNetwork net = build_tree(specs);

  const std::size_t hyps = rng.between(opt.min_hypotheses, opt.max_hypotheses);
  std::vector<double> priors = random_distribution(rng, hyps, 0.3);
  std::map<NodeId, PmfTable> pmfs;
  for (NodeId l : net.leaves()) {
    PmfTable t(hyps, net.obs_size(l));
    for (std::size_t j = 0; j < hyps; ++j) {
      const auto row = random_distribution(rng, net.obs_size(l), 0.05);
      std::copy(row.begin(), row.end(), t.row(j).begin());
    }
    pmfs.emplace(l, std::move(t));
  }
  HypothesisModel model = make_model(net, std::move(priors), std::move(pmfs));

  StrategySet strategies(net.size());
  for (NodeId m : net.non_fc_nodes()) {
    strategies[m.value] = init_random(InputSpace(net.input_dims(m)), net.alphabet_size(m), rng.next());
  }
  return {std::move(net), std::move(model), std::move(strategies)};
}

}  // namespace treedet
