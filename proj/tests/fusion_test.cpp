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


#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace treedet {
namespace {

constexpr double kTol = 1e-12;

TEST(MapFusionTable, SingleBinaryInput) {
  const std::vector<double> pri{0.5, 0.5};
  const FusionTable t = map_fusion_table(pri, {PmfTable::from_rows({{0.8, 0.2}, {0.3, 0.7}})});
  EXPECT_EQ(t.decision, (std::vector<std::size_t>{0, 1}));
}

TEST(MapFusionTable, PerfectInputIsIdentity) {
  const std::vector<double> pri{0.5, 0.5};
  const FusionTable t = map_fusion_table(pri, {PmfTable::from_rows({{1, 0}, {0, 1}})});
  EXPECT_EQ(t.decision, (std::vector<std::size_t>{0, 1}));
}

TEST(MapFusionTable, PriorDominatesUniformInputs) {
  const std::vector<double> pri{0.6, 0.4};
  const FusionTable t = map_fusion_table(pri, {PmfTable::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                                               PmfTable::from_rows({{0.25, 0.75}, {0.25, 0.75}})});
  EXPECT_EQ(t.input_space.dims(), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(t.decision, (std::vector<std::size_t>(4, 0)));
}

TEST(MapFusionTable, TiesGoToSmallestHypothesis) {
  const std::vector<double> pri{0.25, 0.25, 0.5};
  const FusionTable t = map_fusion_table(pri, {PmfTable::from_rows({{0.5, 0.5}, {0.5, 0.5}, {0.25, 0.75}})});
  EXPECT_EQ(t.decision, (std::vector<std::size_t>{0, 2}));
}

TEST(MapFusionTable, HypothesisCountMismatch) {
  const std::vector<double> pri{0.5, 0.5};
  try {
    map_fusion_table(pri, {PmfTable::from_rows({{1, 0}, {0, 1}, {0.5, 0.5}})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

double single_leaf_pe(const std::vector<std::vector<double>>& rows, std::vector<double> pri = {0.5, 0.5}) {
  const TreeNetwork net = testing::single_leaf(2, 1);
  const HypothesisModel m = testing::binary_model(net, rows, std::move(pri));
  StrategySet s(2);
  s[0] = testing::identity_map(2);
  return network_error_probability(net, m, s);
}

TEST(NetworkErrorProbability, HandExamples) {
  EXPECT_NEAR(single_leaf_pe({{0.8, 0.2}, {0.3, 0.7}}), 0.25, kTol);
  EXPECT_NEAR(single_leaf_pe({{1, 0}, {0, 1}}), 0.0, kTol);
  EXPECT_NEAR(single_leaf_pe({{0.4, 0.6}, {0.4, 0.6}}), 0.5, kTol);
}

TEST(NetworkErrorProbability, MissingStrategy) {
  const TreeNetwork net = make_tree22(1, 1, 2);
  const HypothesisModel m = gaussian_antipodal_model(net, 0.0, 2, 1.0);
  StrategySet s(net.size());
  try {
    network_error_probability(net, m, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingStrategy);
  }
}

TEST(RestrictedErrorProbability, ReducesToSingleInput) {
  RestrictedModel rm;
  rm.node = NodeId{0};
  rm.y_space = InputSpace({2});
  rm.y_pmf = PmfTable::from_rows({{0.8, 0.2}, {0.3, 0.7}});
  rm.v_pmf = PmfTable::from_rows({{1.0}, {1.0}});
  rm.channel = TransitionMatrix::identity(2, 2);
  rm.priors = {0.5, 0.5};
  rm.target_output_card = 2;
  EXPECT_NEAR(restricted_error_probability(rm, testing::identity_map(2)), 0.25, kTol);
}

TEST(RestrictedErrorProbability, ConstantRuleLeavesOnlyV) {
  RestrictedModel rm;
  rm.node = NodeId{0};
  rm.y_space = InputSpace({3});
  rm.y_pmf = PmfTable::from_rows({{0.5, 0.3, 0.2}, {0.1, 0.2, 0.7}});
  rm.v_pmf = PmfTable::from_rows({{0.6, 0.4}, {0.2, 0.8}});
  rm.channel = TransitionMatrix::identity(2, 2);
  rm.priors = {0.3, 0.7};
  rm.target_output_card = 2;
  const double expected = 1.0 - (std::max(0.3 * 0.6, 0.7 * 0.2) + std::max(0.3 * 0.4, 0.7 * 0.8));
  EXPECT_NEAR(restricted_error_probability(rm, DecisionFunction::constant(InputSpace({3}), 2)), expected,
              kTol);
}

TEST(RestrictedErrorProbability, ShapeMismatch) {
  RestrictedModel rm;
  rm.y_space = InputSpace({2});
  rm.y_pmf = PmfTable::from_rows({{0.8, 0.2}, {0.3, 0.7}});
  rm.v_pmf = PmfTable::from_rows({{1.0}, {1.0}});
  rm.channel = TransitionMatrix::identity(2, 2);
  rm.priors = {0.5, 0.5};
  rm.target_output_card = 2;
  try {
    restricted_error_probability(rm, DecisionFunction::constant(InputSpace({3}), 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(RestrictedErrorProbability, ThreeNodeNetAgainstEnumeration) {
  const TreeNetwork net = make_parallel(2, 1, 3);
  std::map<NodeId, PmfTable> pmfs;
  pmfs.emplace(NodeId{0}, PmfTable::from_rows({{0.5, 0.3, 0.2}, {0.1, 0.3, 0.6}}));
  pmfs.emplace(NodeId{1}, PmfTable::from_rows({{0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}}));
  const HypothesisModel m = make_model(net, {0.4, 0.6}, std::move(pmfs));
  for (Message a = 0; a < 8; ++a) {
    for (Message b = 0; b < 8; ++b) {
      StrategySet s(3);
      s[0] = DecisionFunction(InputSpace({3}), 2, {Message(a & 1), Message((a >> 1) & 1), Message((a >> 2) & 1)});
      s[1] = DecisionFunction(InputSpace({3}), 2, {Message(b & 1), Message((b >> 1) & 1), Message((b >> 2) & 1)});
      const double brute = joint_bruteforce_pe(net, m, s);
      EXPECT_NEAR(network_error_probability(net, m, s), brute, kTol);
      for (NodeId k : net.non_fc_nodes()) {
        EXPECT_NEAR(restricted_error_probability(build_restricted_model(net, m, s, k), *s[k.value]), brute,
                    kTol);
      }
    }
  }
}

TEST(FusionProperties, ConsistencyAndBounds) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const RandomInstance inst = random_instance(seed);
    const double pe = network_error_probability(inst.net, inst.model, inst.strategies);
    const double max_prior = *std::max_element(inst.model.priors.begin(), inst.model.priors.end());
    EXPECT_GE(pe, -kTol);
    EXPECT_LE(pe, 1.0 - max_prior + kTol);
    EXPECT_NEAR(joint_bruteforce_pe(inst.net, inst.model, inst.strategies), pe, kTol) << seed;
    for (NodeId m : inst.net.non_fc_nodes()) {
      const RestrictedModel rm = build_restricted_model(inst.net, inst.model, inst.strategies, m);
      EXPECT_NEAR(restricted_error_probability(rm, *inst.strategies[m.value]), pe, kTol) << seed;
    }
  }
}

// Renames node m's messages by `perm` and rewires its successor so the
// network computes the same function.
StrategySet relabel(const TreeNetwork& net, StrategySet s, NodeId m, const std::vector<Message>& perm) {
  const DecisionFunction& g = *s[m.value];
  std::vector<Message> t(g.table().begin(), g.table().end());
  for (Message& z : t) z = perm[z];
  s[m.value] = DecisionFunction(g.input_space(), g.output_card(), t);
  const NodeId next = *net.successor(m);
  if (net.is_fusion_center(next)) return s;
  const auto& preds = net.immediate_predecessors(next);
  const std::size_t k = static_cast<std::size_t>(std::find(preds.begin(), preds.end(), m) - preds.begin());
  const DecisionFunction& h = *s[next.value];
  std::vector<Message> ht(h.table().size());
  for (std::size_t idx = 0; idx < ht.size(); ++idx) {
    auto c = h.input_space().unflatten(idx);
    c[k] = perm[c[k]];
    ht[h.input_space().flatten(c)] = h[idx];
  }
  s[next.value] = DecisionFunction(h.input_space(), h.output_card(), std::move(ht));
  return s;
}

TEST(FusionProperties, RelabelingInvariance) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const RandomInstance inst = random_instance(seed);
    const double pe = network_error_probability(inst.net, inst.model, inst.strategies);
    for (NodeId m : inst.net.non_fc_nodes()) {
      std::vector<Message> perm(inst.net.alphabet_size(m));
      std::iota(perm.begin(), perm.end(), Message{0});
      std::reverse(perm.begin(), perm.end());
      if (perm.size() > 2) std::swap(perm[0], perm[1]);
      const StrategySet s = relabel(inst.net, inst.strategies, m, perm);
      EXPECT_NEAR(network_error_probability(inst.net, inst.model, s), pe, kTol) << seed;
      const RestrictedModel rm = build_restricted_model(inst.net, inst.model, s, m);
      EXPECT_NEAR(restricted_error_probability(rm, *s[m.value]), pe, kTol) << seed;
    }
  }
}

}  // namespace
}  // namespace treedet
