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

// MAP fusion and exact Bayes error, on the full network and on the
// restricted two-node model.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "treedet/error.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/propagation.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/topology.hpp"

namespace treedet {

struct FusionTable {
  InputSpace input_space;
  std::vector<std::size_t> decision;  // hypothesis index per joint FC input
};

// argmax_j pi_j prod_i P_j(u_i) per joint input; ties go to the smallest j.
inline FusionTable map_fusion_table(std::span<const double> priors,
                                    const std::vector<PmfTable>& fc_input_pmfs) {
  const std::size_t hyps = priors.size();
  std::vector<std::size_t> dims;
  std::vector<const PmfTable*> parts;
  for (const PmfTable& t : fc_input_pmfs) {
    if (t.hypotheses() != hyps) {
      throw Error(ErrorCode::kDimensionMismatch, "PMF hypothesis count != prior count");
    }
    dims.push_back(t.symbols());
    parts.push_back(&t);
  }
  const PmfTable joint = product_pmf(parts, hyps);
  FusionTable out{InputSpace(dims), std::vector<std::size_t>(joint.symbols(), 0)};
  for (std::size_t u = 0; u < joint.symbols(); ++u) {
    double best = -1.0;
    for (std::size_t j = 0; j < hyps; ++j) {
      const double score = priors[j] * joint(j, u);
      if (score > best) {
        best = score;
        out.decision[u] = j;
      }
    }
  }
  return out;
}

// 1 - sum_u max_j pi_j P_j(u) over a joint table.
inline double map_error(std::span<const double> priors, const PmfTable& joint) {
  double correct = 0.0;
  for (std::size_t u = 0; u < joint.symbols(); ++u) {
    double best = 0.0;
    for (std::size_t j = 0; j < priors.size(); ++j) best = std::max(best, priors[j] * joint(j, u));
    correct += best;
  }
  return 1.0 - correct;
}

// Bayes error of the MAP FC given the current strategies.
inline double network_error_probability(Propagator& prop) {
  const TreeNetwork& net = prop.network();
  std::vector<const PmfTable*> parts;
  for (NodeId p : net.immediate_predecessors(net.fusion_center())) {
    parts.push_back(&prop.output_pmf(p));
  }
  return map_error(prop.model().priors, product_pmf(parts, prop.hypotheses()));
}

inline double network_error_probability(const TreeNetwork& net, const HypothesisModel& model,
                                        const StrategySet& strategies) {
  Propagator prop(net, model, strategies);
  return network_error_probability(prop);
}

// P_j(w) = sum_z P_j(w|z) sum_{y : gamma(y) = z} P_j(y).
inline PmfTable restricted_w_pmf(const RestrictedModel& rm, const DecisionFunction& gamma) {
  if (gamma.input_space().size() != rm.y_pmf.symbols() ||
      gamma.output_card() != rm.target_output_card ||
      rm.channel.from_card() != rm.target_output_card) {
    throw Error(ErrorCode::kDimensionMismatch, "decision function does not fit restricted model");
  }
  const std::size_t hyps = rm.priors.size();
  PmfTable z_pmf(hyps, gamma.output_card());
  for (std::size_t j = 0; j < hyps; ++j) {
    for (std::size_t y = 0; y < rm.y_pmf.symbols(); ++y) z_pmf(j, gamma[y]) += rm.y_pmf(j, y);
  }
  PmfTable w_pmf(hyps, rm.channel.to_card());
  for (std::size_t j = 0; j < hyps; ++j) {
    for (std::size_t w = 0; w < rm.channel.to_card(); ++w) {
      double s = 0.0;
      for (std::size_t z = 0; z < z_pmf.symbols(); ++z) s += rm.channel(j, w, z) * z_pmf(j, z);
      w_pmf(j, w) = s;
    }
  }
  return w_pmf;
}

// 1 - sum_v sum_w max_j pi_j P_j(v) P_j(w).
inline double restricted_error_probability(const RestrictedModel& rm,
                                           const DecisionFunction& gamma) {
  const PmfTable w_pmf = restricted_w_pmf(rm, gamma);
  const std::size_t hyps = rm.priors.size();
  double correct = 0.0;
  for (std::size_t v = 0; v < rm.v_pmf.symbols(); ++v) {
    for (std::size_t w = 0; w < w_pmf.symbols(); ++w) {
      double best = 0.0;
      for (std::size_t j = 0; j < hyps; ++j) {
        best = std::max(best, rm.priors[j] * rm.v_pmf(j, v) * w_pmf(j, w));
      }
      correct += best;
    }
  }
  return 1.0 - correct;
}

}  // namespace treedet
