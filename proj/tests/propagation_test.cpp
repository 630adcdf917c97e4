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


#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace treedet {
namespace {

constexpr double kTol = 1e-12;

// Tree with binary observations at every leaf; l1 has P_j(x = 1) = p[j],
// the others q[j].
struct SmallTree {
  TreeNetwork net = make_tree22(1, 1, 2);
  HypothesisModel model;
  StrategySet s;

  SmallTree(std::vector<double> p, std::vector<double> q) {
    std::map<NodeId, PmfTable> pmfs;
    for (NodeId l : net.leaves()) {
      const auto& r = l.value == 0 ? p : q;
      pmfs.emplace(l, PmfTable::from_rows({{1 - r[0], r[0]}, {1 - r[1], r[1]}}));
    }
    model = make_model(net, {0.5, 0.5}, std::move(pmfs));
    s.resize(net.size());
    for (NodeId l : net.leaves()) s[l.value] = testing::identity_map(2);
    for (NodeId r : net.relays()) s[r.value] = testing::and_gate();
  }
};

TEST(NodeOutputPmf, IdentityLeafPassesObservation) {
  const TreeNetwork net = testing::single_leaf(3, 2);
  const HypothesisModel m = testing::binary_model(net, {{0.2, 0.3, 0.5}, {0.6, 0.3, 0.1}});
  StrategySet s(2);
  s[0] = DecisionFunction(InputSpace({3}), 4, {0, 1, 2});
  const ConditionalPmf out = node_output_pmf(net, m, s, NodeId{0});
  EXPECT_EQ(out.node, NodeId{0});
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t x = 0; x < 3; ++x) EXPECT_DOUBLE_EQ(out.table(j, x), m.leaf_pmf(NodeId{0})(j, x));
    EXPECT_DOUBLE_EQ(out.table(j, 3), 0.0);
  }
}

TEST(NodeOutputPmf, SignQuantizerOfUnitAntipodal) {
  const TreeNetwork net = testing::single_leaf(2, 1);
  const HypothesisModel m = gaussian_antipodal_model(net, 0.0, 2, 1.0);
  StrategySet s(2);
  s[0] = testing::identity_map(2);
  const ConditionalPmf out = node_output_pmf(net, m, s, NodeId{0});
  EXPECT_NEAR(out.table(1, 1), 0.841345, 1e-6);
  EXPECT_NEAR(out.table(0, 1), 0.158655, 1e-6);
}

TEST(NodeOutputPmf, AndRelaySquaresProbability) {
  const SmallTree t({0.3, 0.7}, {0.3, 0.7});
  const ConditionalPmf out = node_output_pmf(t.net, t.model, t.s, NodeId{4});
  EXPECT_NEAR(out.table(0, 1), 0.09, kTol);
  EXPECT_NEAR(out.table(1, 1), 0.49, kTol);
  EXPECT_TRUE(out.table.is_row_stochastic());
}

TEST(NodeOutputPmf, MissingStrategy) {
  SmallTree t({0.3, 0.7}, {0.3, 0.7});
  t.s[1].reset();
  try {
    node_output_pmf(t.net, t.model, t.s, NodeId{4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingStrategy);
  }
}

TEST(RelayTransition, PassThroughIsIdentity) {
  SmallTree t({0.3, 0.7}, {0.2, 0.9});
  // gamma(u_l1, u_l2) = u_l2
  t.s[4] = DecisionFunction(InputSpace({2, 2}), 2, {0, 1, 0, 1});
  EXPECT_TRUE(relay_transition_matrix(t.net, t.model, t.s, NodeId{4}, NodeId{1}).is_identity());
}

TEST(RelayTransition, AndRelayColumns) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  // Fixed input from l1; the other input is l2 with P_j(1) = q_j.
  const TransitionMatrix m = relay_transition_matrix(t.net, t.model, t.s, NodeId{4}, NodeId{0});
  const double q[2] = {0.3, 0.6};
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(m(j, 0, 0), 1.0, kTol);
    EXPECT_NEAR(m(j, 1, 0), 0.0, kTol);
    EXPECT_NEAR(m(j, 0, 1), 1.0 - q[j], kTol);
    EXPECT_NEAR(m(j, 1, 1), q[j], kTol);
  }
  EXPECT_TRUE(m.is_column_stochastic());
}

TEST(RelayTransition, IgnoredInputGivesEqualColumns) {
  SmallTree t({0.2, 0.9}, {0.3, 0.6});
  t.s[4] = DecisionFunction(InputSpace({2, 2}), 2, {0, 0, 1, 1});  // depends on l1 only
  const TransitionMatrix m = relay_transition_matrix(t.net, t.model, t.s, NodeId{4}, NodeId{1});
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(m(j, r, 0), m(j, r, 1), kTol);
  }
}

TEST(RelayTransition, NotAPredecessor) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  try {
    relay_transition_matrix(t.net, t.model, t.s, NodeId{4}, NodeId{2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAPredecessor);
  }
}

TEST(ChainMatrix, FusionNeighbourIsIdentity) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  const TransitionMatrix c = chain_matrix(t.net, t.model, t.s, NodeId{5});
  EXPECT_TRUE(c.is_identity());
  EXPECT_EQ(c.from_card(), 2u);
}

TEST(ChainMatrix, TwoPassThroughRelays) {
  // leaf 0 -> relay 1 -> relay 2 -> FC 4; leaf 3 feeds relay 2 too.
  const TreeNetwork net = build_tree({NodeSpec{NodeKind::kLeaf, NodeId{1}, 1, 2},
                                      NodeSpec{NodeKind::kRelay, NodeId{2}, 1, 0},
                                      NodeSpec{NodeKind::kRelay, NodeId{4}, 1, 0},
                                      NodeSpec{NodeKind::kLeaf, NodeId{2}, 1, 2},
                                      NodeSpec{NodeKind::kFusionCenter, std::nullopt, 0, 0}});
  const HypothesisModel m = testing::binary_model(net, {{0.7, 0.3}, {0.1, 0.9}});
  StrategySet s(net.size());
  s[0] = testing::identity_map(2);
  s[3] = testing::identity_map(2);
  s[1] = testing::identity_map(2);
  s[2] = DecisionFunction(InputSpace({2, 2}), 2, {0, 0, 1, 1});  // forwards relay 1
  EXPECT_TRUE(chain_matrix(net, m, s, NodeId{0}).is_identity());
}

TEST(ChainMatrix, LeafUnderAndRelay) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  const TransitionMatrix c = chain_matrix(t.net, t.model, t.s, NodeId{0});
  const TransitionMatrix direct = relay_transition_matrix(t.net, t.model, t.s, NodeId{4}, NodeId{0});
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(c(j, a, b), direct(j, a, b), kTol);
    }
  }
}

TEST(ChainMatrix, FusionCenterRejected) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  try {
    chain_matrix(t.net, t.model, t.s, NodeId{6});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIsFusionCenter);
  }
}

TEST(RestrictedModel, ParallelLeaf) {
  const TreeNetwork net = make_parallel(3, 1, 3);
  const HypothesisModel m = gaussian_antipodal_model(net, 0.0, 3, 1.0);
  StrategySet s(net.size());
  for (NodeId l : net.leaves()) s[l.value] = DecisionFunction(InputSpace({3}), 2, {0, 1, 1});
  const RestrictedModel rm = build_restricted_model(net, m, s, NodeId{1});
  EXPECT_TRUE(rm.channel.is_identity());
  EXPECT_EQ(rm.y_pmf, m.leaf_pmf(NodeId{1}));
  Propagator prop(net, m, s);
  const PmfTable v = product_pmf({&prop.output_pmf(NodeId{0}), &prop.output_pmf(NodeId{2})}, 2);
  EXPECT_EQ(rm.v_pmf, v);
  EXPECT_EQ(rm.target_output_card, 2u);
}

TEST(RestrictedModel, RelayOfTwoByTwoTree) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  const RestrictedModel rm = build_restricted_model(t.net, t.model, t.s, NodeId{4});
  Propagator prop(t.net, t.model, t.s);
  EXPECT_EQ(rm.y_pmf, product_pmf({&prop.output_pmf(NodeId{0}), &prop.output_pmf(NodeId{1})}, 2));
  EXPECT_EQ(rm.v_pmf, prop.output_pmf(NodeId{5}));
  EXPECT_TRUE(rm.channel.is_identity());
  EXPECT_EQ(rm.y_space.dims(), (std::vector<std::size_t>{2, 2}));
}

TEST(RestrictedModel, LeafOfTwoByTwoTree) {
  const SmallTree t({0.2, 0.9}, {0.3, 0.6});
  const RestrictedModel rm = build_restricted_model(t.net, t.model, t.s, NodeId{0});
  Propagator prop(t.net, t.model, t.s);
  EXPECT_EQ(rm.v_pmf, prop.output_pmf(NodeId{5}));
  const TransitionMatrix r1 = prop.relay_transition(NodeId{4}, NodeId{0});
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(rm.channel(j, a, b), r1(j, a, b), kTol);
    }
  }
}

TEST(RestrictedModel, SingleFusionInputHasUnitV) {
  const TreeNetwork net = testing::single_leaf(3, 1);
  const HypothesisModel m = testing::binary_model(net, {{0.2, 0.3, 0.5}, {0.6, 0.3, 0.1}});
  StrategySet s(2);
  s[0] = DecisionFunction(InputSpace({3}), 2, {0, 0, 1});
  const RestrictedModel rm = build_restricted_model(net, m, s, NodeId{0});
  EXPECT_EQ(rm.v_pmf.symbols(), 1u);
  EXPECT_DOUBLE_EQ(rm.v_pmf(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(rm.v_pmf(1, 0), 1.0);
}

// Reference P_j(u_K = a | u_0 = b) by enumerating every joint observation.
struct JointChain {
  std::vector<std::vector<std::vector<double>>> joint;  // [j][a][b]
  std::vector<std::vector<double>> marg;                // [j][b]
};

JointChain enumerate_chain(const RandomInstance& inst, NodeId m0) {
  const TreeNetwork& net = inst.net;
  const NodeId top = net.last_successor(m0);
  const std::size_t hyps = inst.model.num_hypotheses();
  const std::vector<NodeId> leaves = net.leaves();
  std::vector<std::size_t> dims;
  for (NodeId l : leaves) dims.push_back(net.obs_size(l));
  const InputSpace obs(dims);
  JointChain out;
  out.joint.assign(hyps, std::vector<std::vector<double>>(net.alphabet_size(top),
                                                          std::vector<double>(net.alphabet_size(m0), 0.0)));
  out.marg.assign(hyps, std::vector<double>(net.alphabet_size(m0), 0.0));
  std::vector<std::size_t> msg(net.size());
  for (std::size_t x = 0; x < obs.size(); ++x) {
    for (std::size_t k = 0; k < leaves.size(); ++k) msg[leaves[k].value] = obs.digit(x, k);
    for (NodeId m : net.evaluation_order()) {
      if (net.is_fusion_center(m)) continue;
      std::vector<std::size_t> c;
      if (net.is_leaf(m)) {
        c.push_back(msg[m.value]);
      } else {
        for (NodeId p : net.immediate_predecessors(m)) c.push_back(msg[p.value]);
      }
      msg[m.value] = inst.strategies[m.value]->apply(c);
    }
    for (std::size_t j = 0; j < hyps; ++j) {
      double p = 1.0;
      for (std::size_t k = 0; k < leaves.size(); ++k) p *= inst.model.leaf_pmf(leaves[k])(j, obs.digit(x, k));
      out.joint[j][msg[top.value]][msg[m0.value]] += p;
      out.marg[j][msg[m0.value]] += p;
    }
  }
  return out;
}

TEST(PropagationProperties, ChainMatchesEnumeration) {
  RandomInstanceOptions opt;
  opt.max_depth = 4;
  opt.max_relays = 3;
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const RandomInstance inst = random_instance(seed, opt);
    Propagator prop(inst.net, inst.model, inst.strategies);
    for (NodeId m0 : inst.net.non_fc_nodes()) {
      const TransitionMatrix c = prop.chain(m0);
      ASSERT_TRUE(c.is_column_stochastic());
      const JointChain ref = enumerate_chain(inst, m0);
      for (std::size_t j = 0; j < c.hypotheses(); ++j) {
        for (std::size_t b = 0; b < c.from_card(); ++b) {
          if (ref.marg[j][b] < 1e-9) continue;  // conditional undefined
          for (std::size_t a = 0; a < c.to_card(); ++a) {
            EXPECT_NEAR(c(j, a, b), ref.joint[j][a][b] / ref.marg[j][b], 1e-11)
                << "seed " << seed << " node " << m0.value;
            ++compared;
          }
        }
      }
    }
  }
  EXPECT_GT(compared, 500);
}

TEST(PropagationProperties, RestrictedModelReproducesTopOutput) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const RandomInstance inst = random_instance(seed);
    Propagator prop(inst.net, inst.model, inst.strategies);
    for (NodeId m0 : inst.net.non_fc_nodes()) {
      const RestrictedModel rm = prop.restricted_model(m0);
      EXPECT_TRUE(rm.y_pmf.is_row_stochastic());
      EXPECT_TRUE(rm.v_pmf.is_row_stochastic());
      const PmfTable w = restricted_w_pmf(rm, prop.strategy(m0));
      const PmfTable& top = prop.output_pmf(inst.net.last_successor(m0));
      for (std::size_t j = 0; j < w.hypotheses(); ++j) {
        for (std::size_t u = 0; u < w.symbols(); ++u) EXPECT_NEAR(w(j, u), top(j, u), kTol);
      }
    }
  }
}

TEST(PropagationProperties, InvalidationMatchesFreshEvaluation) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    RandomInstance inst = random_instance(seed);
    StrategySet s = inst.strategies;
    Propagator prop(inst.net, inst.model, s);
    for (NodeId m : inst.net.non_fc_nodes()) prop.output_pmf(m);
    for (NodeId m : inst.net.non_fc_nodes()) {
      s[m.value] = init_random(InputSpace(inst.net.input_dims(m)), inst.net.alphabet_size(m), seed * 31 + m.value);
      prop.invalidate(m);
      Propagator fresh(inst.net, inst.model, s);
      for (NodeId k : inst.net.non_fc_nodes()) EXPECT_EQ(prop.output_pmf(k), fresh.output_pmf(k));
    }
  }
}

}  // namespace
}  // namespace treedet
