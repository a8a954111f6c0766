#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace ipmsrl;
using namespace testing_support;

namespace {

std::shared_ptr<const Scenario> with_attacker(ScenarioConfig cfg, double theta, double progress, double lateral) {
  cfg.attacker.targeting_theta = theta;
  cfg.attacker.p_progress = progress;
  cfg.attacker.p_lateral_success = lateral;
  return make_scenario(cfg);
}

WorldState fresh(const Scenario& sc) { return WorldState(sc.network.size(), sc.config.num_defenders); }

}  // namespace

TEST(Attacker, NamedInitialCompromiseConsumesNoDraws) {
  auto cfg = default_config();
  cfg.attacker.initial_node = "hmi-3";
  auto sc = make_scenario(cfg);
  Rng a(1), b(1);
  EXPECT_EQ(initial_compromise(*sc, a), idx(*sc, "hmi-3"));
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Attacker, RandomInitialCompromiseIsUniformOverObservedNodes) {
  auto sc = default_scenario();
  std::map<NodeIdx, int> counts;
  Rng r(3);
  const int n = 24000;
  for (int i = 0; i < n; ++i) ++counts[*initial_compromise(*sc, r)];
  ASSERT_EQ(counts.size(), 12u);
  for (auto& [node, c] : counts) {
    EXPECT_FALSE(sc->network.critical(node));
    EXPECT_NEAR(c, n / 12.0, 5 * std::sqrt(n / 12.0));
  }
}

TEST(Attacker, ProgressionAndLateralInSameStep) {
  auto cfg = default_config();
  auto sc = with_attacker(cfg, 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  const NodeIdx h = idx(*sc, "hmi-1");
  w.nodes[h].stage = Stage(6);
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_EQ(ev[0].kind, AttackEvent::Kind::Progression);
  EXPECT_EQ(ev[0].stage.index(), 7);
  EXPECT_EQ(ev[1].kind, AttackEvent::Kind::LateralAttempt);
  EXPECT_EQ(ev[2].kind, AttackEvent::Kind::LateralSuccess);
  // fully targeted: the only neighbour one hop from a critical node
  EXPECT_EQ(ev[2].target, idx(*sc, "plc-1"));
  EXPECT_EQ(w.nodes[idx(*sc, "plc-1")].stage.index(), 1);
  EXPECT_EQ(w.nodes[h].stage.index(), 7);
}

TEST(Attacker, BelowGateNoLateral) {
  auto sc = with_attacker(default_config(), 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  w.nodes[idx(*sc, "hmi-1")].stage = Stage(5);
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, AttackEvent::Kind::Progression);
}

TEST(Attacker, CeilingAtImpact) {
  auto sc = with_attacker(default_config(), 1.0, 1.0, 0.0);
  auto w = fresh(*sc);
  w.nodes[idx(*sc, "lop-2")].stage = Stage(12);
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, AttackEvent::Kind::LateralAttempt);
  EXPECT_EQ(ev[0].target, idx(*sc, "rtu-3"));
  EXPECT_EQ(w.nodes[idx(*sc, "lop-2")].stage.index(), 12);
}

TEST(Attacker, ContainedNodeFrozen) {
  auto sc = with_attacker(default_config(), 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  const NodeIdx h = idx(*sc, "hmi-1");
  w.nodes[h].stage = Stage(9);
  w.nodes[h].contained = true;
  Rng r(0), untouched(0);
  EXPECT_TRUE(attacker_step(*sc, w, r).empty());
  EXPECT_EQ(w.nodes[h].stage.index(), 9);
  EXPECT_EQ(r.next_u64(), untouched.next_u64());
}

TEST(Attacker, ContainedNodeProgressesWhenFreezeDisabled) {
  auto cfg = default_config();
  cfg.contain_freezes_progression = false;
  auto sc = with_attacker(cfg, 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  const NodeIdx h = idx(*sc, "hmi-1");
  w.nodes[h].stage = Stage(9);
  w.nodes[h].contained = true;
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  ASSERT_EQ(ev.size(), 1u);  // progresses, but cannot leave containment
  EXPECT_EQ(ev[0].kind, AttackEvent::Kind::Progression);
}

TEST(Attacker, ContainedAndInfectedNodesAreNotTargets) {
  auto sc = with_attacker(default_config(), 1.0, 0.0, 1.0);
  auto w = fresh(*sc);
  w.nodes[idx(*sc, "hmi-1")].stage = Stage(8);
  w.nodes[idx(*sc, "plc-1")].contained = true;
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NE(ev[1].target, idx(*sc, "plc-1"));
  EXPECT_EQ(sc->network.distance_to_critical(ev[1].target), 2);
}

TEST(Attacker, NoEligibleTargetConsumesNoDraws) {
  auto sc = scenario_from(chain_doc(1));
  auto w = fresh(*sc);
  // hmi-1's only neighbour is already infected
  w.nodes[idx(*sc, "hmi-1")].stage = Stage(12);
  w.nodes[idx(*sc, "plc-1")].contained = true;
  w.nodes[idx(*sc, "plc-1")].stage = Stage(2);
  Rng a(4), b(4);
  EXPECT_FALSE(choose_lateral_target(*sc, w, idx(*sc, "hmi-1"), 0.5, a));
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Attacker, ViralChoiceUniformOverEligible) {
  auto sc = default_scenario();
  auto w = fresh(*sc);
  const NodeIdx src = idx(*sc, "hmi-1");
  const auto& nb = sc->network.neighbors(src);
  std::map<NodeIdx, int> counts;
  Rng r(8);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[*choose_lateral_target(*sc, w, src, 0.0, r)];
  ASSERT_EQ(counts.size(), nb.size());
  for (auto& [node, c] : counts) EXPECT_NEAR(c, double(n) / nb.size(), 5 * std::sqrt(double(n) / nb.size()));
}

TEST(Attacker, PartialTargetingMixesNearestAndUniform) {
  auto sc = default_scenario();
  auto w = fresh(*sc);
  const NodeIdx src = idx(*sc, "hmi-1");
  const double theta = 0.6;
  const double k = static_cast<double>(sc->network.neighbors(src).size());
  int nearest = 0;
  Rng r(9);
  const int n = 40000;
  for (int i = 0; i < n; ++i) nearest += *choose_lateral_target(*sc, w, src, theta, r) == idx(*sc, "plc-1");
  const double p = theta + (1 - theta) / k;
  EXPECT_NEAR(nearest / double(n), p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(Attacker, CriticalInfectionLatchesLossAndStops) {
  auto sc = with_attacker(default_config(), 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  w.nodes[idx(*sc, "hmi-1")].stage = Stage(9);
  w.nodes[idx(*sc, "plc-1")].stage = Stage(9);  // acts after hmi-1, before plc-3
  w.nodes[idx(*sc, "plc-3")].stage = Stage(9);
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  EXPECT_EQ(w.outcome, Outcome::Loss);
  ASSERT_FALSE(ev.empty());
  EXPECT_EQ(ev.back().kind, AttackEvent::Kind::LateralSuccess);
  EXPECT_TRUE(sc->network.critical(ev.back().target));
  EXPECT_EQ(ev.back().source, idx(*sc, "plc-1"));
  // plc-3 never acted
  EXPECT_EQ(w.nodes[idx(*sc, "plc-3")].stage.index(), 9);
}

TEST(Attacker, NewlyInfectedNodesWaitForNextStep) {
  auto sc = with_attacker(default_config(), 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  w.nodes[idx(*sc, "hmi-1")].stage = Stage(7);
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  EXPECT_EQ(w.nodes[idx(*sc, "plc-1")].stage.index(), 1);
  for (const auto& e : ev) EXPECT_NE(e.source, idx(*sc, "plc-1"));
}

TEST(Attacker, ExclusiveActionSkipsLateralAfterProgression) {
  auto cfg = default_config();
  cfg.attacker.exclusive_action = true;
  auto sc = with_attacker(cfg, 1.0, 1.0, 1.0);
  auto w = fresh(*sc);
  w.nodes[idx(*sc, "hmi-1")].stage = Stage(8);
  Rng r(0);
  auto ev = attacker_step(*sc, w, r);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, AttackEvent::Kind::Progression);
}
