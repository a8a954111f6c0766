#include <gtest/gtest.h>

#include "support.hpp"

using namespace ipmsrl;
using namespace testing_support;

namespace {

json quiet_micro(int initial_stage) {
  json doc = chain_doc(1);
  doc["horizon_T"] = 30;
  doc["attacker"] = {{"initial_node", "hmi-1"},
                     {"initial_stage", initial_stage},
                     {"p_progress", 0.0},
                     {"p_lateral_success", 0.0}};
  doc["alert_success_prob"] = 1.0;
  return doc;
}

template <typename T>
int count_records(const Trace& t) {
  int n = 0;
  for (const auto& r : t.events) n += std::holds_alternative<T>(r);
  return n;
}

// Contain, then Eradicate, then Recover on one node, each as soon as the
// agent is free.
Policy cer_script(NodeIdx target) {
  auto next = std::make_shared<int>(0);
  return [target, next](const PolicyInput& in) {
    if (in.view.own_busy || *next >= 3) return DefenderAction::wait();
    const ActionKind order[] = {ActionKind::Contain, ActionKind::Eradicate, ActionKind::Recover};
    return DefenderAction{order[(*next)++], target};
  };
}

// Step at which each action starts: the next one can start the step the
// previous resolves, or the following step if it resolved immediately.
int cer_length(int d_contain, int d_eradicate, int d_recover) {
  int s = 0;
  s += std::max(d_contain, 1);
  s += std::max(d_eradicate, 1);
  return s + d_recover + 1;
}

}  // namespace

TEST(Engine, ResetPlacesInitialCompromise) {
  auto sc = scenario_from(quiet_micro(3));
  Episode ep(sc, 1);
  EXPECT_EQ(ep.world().t, 0);
  EXPECT_EQ(ep.world().nodes[idx(*sc, "hmi-1")].stage.index(), 3);
  ASSERT_TRUE(std::holds_alternative<ResetRecord>(ep.trace().events.at(0)));
  // p_alert = 1: the reset-time initial-attempt alert is always delivered
  ASSERT_EQ(count_records<AlertRecord>(ep.trace()), 1);
  EXPECT_EQ(ep.views()[0].nodes[0].last_known_stage, 3);
}

TEST(Engine, WinCheckedBeforeAttackerMoves) {
  json doc = quiet_micro(6);
  doc["attacker"]["p_progress"] = 1.0;
  doc["attacker"]["p_lateral_success"] = 1.0;
  doc["delays"] = {{"eradicate", {0, 0, 0}}};
  auto sc = scenario_from(doc);
  Episode ep(sc, 0);
  std::vector<DefenderAction> joint{DefenderAction::eradicate(idx(*sc, "hmi-1"))};
  auto r = ep.step(joint);
  EXPECT_TRUE(r.terminal);
  EXPECT_EQ(r.outcome, Outcome::Win);
  EXPECT_EQ(ep.world().t, 1);
  EXPECT_EQ(count_records<AttackRecord>(ep.trace()), 0);
}

TEST(Engine, NoWinWhileContained) {
  auto sc = scenario_from(quiet_micro(0 + 1));
  Episode ep(sc, 0);
  std::vector<DefenderAction> joint{DefenderAction::contain(idx(*sc, "plc-1"))};
  ep.step(joint);
  EXPECT_FALSE(ep.terminal());
}

TEST(Engine, CleanStartWinsAtFirstStep) {
  json doc = quiet_micro(1);
  doc["attacker"]["initial_node"] = "none";
  auto sc = scenario_from(doc);
  Episode ep(sc, 0);
  auto r = ep.step(std::vector<DefenderAction>{DefenderAction::wait()});
  EXPECT_EQ(r.outcome, Outcome::Win);
  EXPECT_EQ(ep.world().t, 1);
}

TEST(Engine, WinOnLastStepIsDraw) {
  json doc = quiet_micro(1);
  doc["attacker"]["initial_node"] = "none";
  doc["horizon_T"] = 1;
  auto sc = scenario_from(doc);
  Episode ep(sc, 0);
  auto r = ep.step(std::vector<DefenderAction>{DefenderAction::wait()});
  EXPECT_EQ(r.outcome, Outcome::Draw);
}

TEST(Engine, DrawAtHorizon) {
  json doc = quiet_micro(4);
  doc["attacker"]["enabled"] = false;
  auto sc = scenario_from(doc);
  std::vector<Policy> ps{Policy(wait_policy)};
  auto res = run_episode(sc, 3, 0, ps);
  EXPECT_EQ(res.outcome, Outcome::Draw);
  EXPECT_EQ(res.length, 30);
  EXPECT_EQ(res.trace.footer->length, 30);
}

TEST(Engine, LossLatchesAndSkipsAlerts) {
  json doc = quiet_micro(7);
  doc["attacker"]["p_progress"] = 1.0;
  doc["attacker"]["p_lateral_success"] = 1.0;
  doc["attacker"]["initial_node"] = "plc-1";
  auto sc = scenario_from(doc);
  Episode ep(sc, 0);
  auto r = ep.step(std::vector<DefenderAction>{DefenderAction::wait()});
  EXPECT_EQ(r.outcome, Outcome::Loss);
  EXPECT_TRUE(ep.terminal());
  const auto& ev = ep.trace().events;
  ASSERT_TRUE(std::holds_alternative<TerminationRecord>(ev.back()));
  const auto& last_attack = std::get<AttackRecord>(ev[ev.size() - 2]);
  EXPECT_EQ(last_attack.event.kind, AttackEvent::Kind::LateralSuccess);
  EXPECT_EQ(last_attack.event.target, idx(*sc, "cwp-1"));
  EXPECT_THROW(ep.step(std::vector<DefenderAction>{DefenderAction::wait()}), std::logic_error);
}

TEST(Engine, LossOnFinalStepStaysLoss) {
  json doc = quiet_micro(7);
  doc["attacker"]["p_progress"] = 1.0;
  doc["attacker"]["p_lateral_success"] = 1.0;
  doc["attacker"]["initial_node"] = "plc-1";
  doc["horizon_T"] = 1;
  auto sc = scenario_from(doc);
  Episode ep(sc, 0);
  EXPECT_EQ(ep.step(std::vector<DefenderAction>{DefenderAction::wait()}).outcome, Outcome::Loss);
}

TEST(Engine, ScriptedNistSequenceDefaultDelays) {
  for (int stage = 1; stage <= 12; ++stage) {
    auto sc = scenario_from(quiet_micro(stage));
    const NodeIdx h = idx(*sc, "hmi-1");
    std::vector<Policy> ps{cer_script(h)};
    auto res = run_episode(sc, 0, 0, ps);
    const auto band = severity(Stage(stage));
    const DelayTable d;
    EXPECT_EQ(res.outcome, Outcome::Win) << stage;
    EXPECT_EQ(res.length, cer_length(d.lookup(ActionKind::Contain, band), d.lookup(ActionKind::Eradicate, band),
                                     d.lookup(ActionKind::Recover, SeverityBand::None)))
        << stage;
  }
}

TEST(Engine, ScriptedNistSequenceIsSumOfDelaysPlusOne) {
  json doc = quiet_micro(6);
  doc["delays"] = {{"contain", {1, 1, 2, 2}}, {"eradicate", {1, 2, 3, 4}}, {"recover", {2, 2, 3, 3}}};
  auto sc = scenario_from(doc);
  std::vector<Policy> ps{cer_script(idx(*sc, "hmi-1"))};
  auto res = run_episode(sc, 0, 0, ps);
  EXPECT_EQ(res.outcome, Outcome::Win);
  // medium-band contain 2, eradicate 3, then recover on a clean node 2
  EXPECT_EQ(res.length, 2 + 3 + 2 + 1);
}

TEST(Engine, IllegalActionsDowngradedAndRecorded) {
  auto sc = scenario_from(quiet_micro(2));
  Episode ep(sc, 0);
  auto r = ep.step(std::vector<DefenderAction>{DefenderAction::contain(idx(*sc, "cwp-1"))});
  EXPECT_TRUE(r.illegal[0]);
  EXPECT_EQ(count_records<IllegalRecord>(ep.trace()), 1);
  EXPECT_EQ(count_records<InitiateRecord>(ep.trace()), 0);
  EXPECT_DOUBLE_EQ(r.rewards[0], 0.0);
}

TEST(Engine, RejectsWrongJointSize) {
  auto sc = default_scenario();
  Episode ep(sc, 0);
  EXPECT_THROW(ep.step(std::vector<DefenderAction>{DefenderAction::wait()}), std::invalid_argument);
}

TEST(Engine, HandComputedRewardBreakdown) {
  auto sc = scenario_from(quiet_micro(1));
  const NodeIdx h = idx(*sc, "hmi-1");
  std::vector<Policy> ps{cer_script(h)};
  auto res = run_episode(sc, 0, 0, ps);
  // contain (low, 0 steps) at t0, eradicate (low, 1) at t1, recover (clean, 0) at t2
  EXPECT_EQ(res.length, 3);
  EXPECT_EQ(res.outcome, Outcome::Win);
  EXPECT_DOUBLE_EQ(res.breakdown.mission, 1.0);
  EXPECT_DOUBLE_EQ(res.breakdown.state_generic, 0.0);
  EXPECT_DOUBLE_EQ(res.breakdown.state_specific, -0.05);
  EXPECT_NEAR(res.breakdown.action_score_total, -0.03, 1e-15);
  EXPECT_NEAR(res.breakdown.total, 1.0 + 0.5 * -0.05 - 0.03, 1e-12);
  EXPECT_NEAR(res.delivered_total, res.breakdown.total, 1e-12);
}

TEST(Engine, ContainedCleanPenaltyAccrues) {
  json doc = quiet_micro(1);
  doc["attacker"]["initial_node"] = "none";
  auto sc = scenario_from(doc);
  auto ep = run_script(sc, 0, {{DefenderAction::contain(idx(*sc, "plc-1"))}});
  ASSERT_EQ(ep.world().outcome, Outcome::Draw);
  const auto& b = ep.breakdown();
  EXPECT_NEAR(b.state_generic, 30 * -0.01 + -0.05, 1e-12);
  EXPECT_NEAR(b.action_score_total, -0.01, 1e-15);
  EXPECT_NEAR(b.total, 0.5 * (30 * -0.01 - 0.05) - 0.01, 1e-12);
}

TEST(Engine, RewardSharesSplitEvenly) {
  auto sc = default_scenario();
  Episode ep(sc, 5);
  std::vector<double> per_agent(2, 0.0);
  while (!ep.terminal()) {
    std::vector<DefenderAction> joint;
    for (int a = 0; a < 2; ++a) joint.push_back(heuristic_policy(ep.view(a)));
    auto r = ep.step(joint);
    ASSERT_EQ(r.rewards[0], r.rewards[1]);
    for (int a = 0; a < 2; ++a) per_agent[a] += r.rewards[a];
  }
  EXPECT_NEAR(per_agent[0] + per_agent[1], ep.breakdown().total, 1e-12);
  EXPECT_DOUBLE_EQ(ep.breakdown().per_agent_share, ep.breakdown().total / 2);
}

TEST(Engine, ThrowingPolicyYieldsInvalidTrace) {
  auto sc = default_scenario();
  std::vector<Policy> ps{Policy(wait_policy), Policy([](const PolicyInput& in) -> DefenderAction {
                           if (in.view.timestep == 3) throw std::runtime_error("boom");
                           return DefenderAction::wait();
                         })};
  auto res = run_episode(sc, 0, 0, ps);
  EXPECT_FALSE(res.valid);
  ASSERT_TRUE(res.trace.footer);
  EXPECT_FALSE(res.trace.footer->valid);
  EXPECT_EQ(res.trace.footer->error, "boom");
}

TEST(Engine, SeqMatchesEventIndex) {
  auto sc = default_scenario();
  std::vector<Policy> ps{Policy(random_policy), Policy(random_policy)};
  auto res = run_episode(sc, 9, 2, ps);
  for (std::size_t i = 0; i < res.trace.events.size(); ++i) {
    if (const auto* a = std::get_if<AlertRecord>(&res.trace.events[i])) {
      EXPECT_EQ(a->alert.seq, i);
    }
  }
}

TEST(Engine, HeuristicWithPerfectAlertsWinsQuickly) {
  auto sc = default_scenario();
  std::vector<Policy> ps{heuristic(), heuristic()};
  for (std::uint64_t e = 0; e < 50; ++e) {
    auto res = run_episode(sc, 0, e, ps);
    EXPECT_EQ(res.outcome, Outcome::Win) << e;
  }
}
