#pragma once

#include <functional>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipmsrl/alerting.hpp"
#include "ipmsrl/attacker.hpp"
#include "ipmsrl/defense.hpp"
#include "ipmsrl/observation.hpp"
#include "ipmsrl/reward.hpp"
#include "ipmsrl/rng.hpp"
#include "ipmsrl/trace.hpp"

namespace ipmsrl {

struct StepResult {
  std::vector<DefenderView> views;
  std::vector<double> rewards;  // per-agent share delivered this step
  std::vector<bool> illegal;
  bool terminal = false;
  Outcome outcome = Outcome::None;
  std::optional<RewardBreakdown> breakdown;  // set on the terminal step
};

// One episode: owns the world, the RNG streams and the trace. Not
// thread-safe; distinct episodes are fully independent.
//
// Step phases: (1) pending actions due now resolve, then agents initiate in
// ascending id order; (2) win check; (3) attacker; (4) loss check; (5) alerts;
// (6) t += 1, draw at T; (7) views and reward shares.
class Episode {
 public:
  Episode(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
          std::uint64_t episode_index = 0)
      : sc_(std::move(scenario)),
        streams_(seed, episode_index),
        space_(sc_->network),
        world_(sc_->network.size(), sc_->config.num_defenders) {
    trace_.header.config_hash = config_hash(sc_->config);
    trace_.header.seed = seed;
    trace_.header.episode_index = episode_index;
    trace_.header.num_agents = sc_->config.num_defenders;
    trace_.header.scenario = to_json(sc_->config);
    reset();
  }

  const Scenario& scenario() const { return *sc_; }
  std::shared_ptr<const Scenario> scenario_ptr() const { return sc_; }
  const ActionSpace& action_space() const { return space_; }
  const WorldState& world() const { return world_; }
  const Trace& trace() const { return trace_; }
  int num_agents() const { return sc_->config.num_defenders; }
  bool terminal() const { return world_.terminal(); }
  Rng& policy_rng() { return streams_.policy; }

  std::vector<DefenderView> views() const { return build_views(*sc_, world_); }
  DefenderView view(int agent) const { return build_view(*sc_, world_, agent); }
  std::vector<DefenderAction> legal(int agent) const { return space_.legal(*sc_, world_, agent); }

  const RewardBreakdown& breakdown() const {
    if (!terminal()) throw std::logic_error("breakdown requested before termination");
    return breakdown_;
  }

  // Sum of every reward share delivered so far, over agents and steps.
  double delivered_total() const { return delivered_; }

  StepResult step(std::span<const DefenderAction> joint);

  // Marks the trace invalid (e.g. a policy failed mid-episode).
  void abort(const std::string& error) {
    TraceFooter f;
    f.valid = false;
    f.error = error;
    f.outcome = world_.outcome;
    f.length = world_.t;
    f.final_nodes = world_.nodes;
    trace_.footer = f;
  }

 private:
  void reset();
  std::uint64_t record(TraceRecord r) {
    trace_.events.push_back(std::move(r));
    return world_.seq++;
  }
  void record_alerts(std::span<const AlertCandidate> candidates);
  int contained_clean() const;
  void finish();

  std::shared_ptr<const Scenario> sc_;
  RngStreams streams_;
  ActionSpace space_;
  WorldState world_;
  Trace trace_;

  // In-run reward accumulators.
  double action_total_ = 0.0;
  double generic_ = 0.0;
  std::set<NodeIdx> ever_infected_;
  RewardBreakdown breakdown_;
  double delivered_ = 0.0;
};

inline void Episode::reset() {
  const auto& atk = sc_->config.attacker;
  auto init = initial_compromise(*sc_, streams_.attacker);
  if (!init) {
    record(ResetRecord{std::nullopt, Stage{}});
    return;
  }
  world_.nodes[*init].stage = Stage(atk.initial_stage);
  ever_infected_.insert(*init);
  record(ResetRecord{init, world_.nodes[*init].stage});
  const AlertCandidate c{*init, AlertTrigger::InitialInfectionAttempt};
  record_alerts(std::span(&c, 1));
}

inline void Episode::record_alerts(std::span<const AlertCandidate> candidates) {
  auto alerts = emit_alerts(candidates, sc_->config.alert_triggers, sc_->config.alert_success_prob,
                            world_, streams_.alerts);
  for (auto& a : alerts) {
    a.seq = world_.seq;
    record(AlertRecord{a});
  }
  update_store(world_.alerts, alerts);
}

inline int Episode::contained_clean() const {
  int n = 0;
  for (NodeIdx i : sc_->network.action_targets()) {
    if (world_.nodes[i].contained && !world_.nodes[i].stage.infected()) ++n;
  }
  return n;
}

inline StepResult Episode::step(std::span<const DefenderAction> joint) {
  if (terminal()) throw std::logic_error("step called on a terminated episode");
  if (joint.size() != static_cast<std::size_t>(num_agents())) {
    throw std::invalid_argument("joint action must contain one action per agent");
  }
  const auto& cfg = sc_->config;
  const int n = num_agents();
  const int t = world_.t;
  StepResult out;
  out.illegal.assign(static_cast<std::size_t>(n), false);

  // (1) defenders
  record(StepRecord{t});
  for (int a = 0; a < n; ++a) {
    const auto& p = world_.pending[static_cast<std::size_t>(a)];
    if (p && p->resolves_at == t) {
      const PendingAction due = *p;
      ResolveResult r = resolve(due, world_);
      record(ResolveRecord{a, due.action, due.target, t, r.success, r.after});
    }
  }
  double step_actions = 0.0;
  for (int a = 0; a < n; ++a) {
    const DefenderAction& act = joint[static_cast<std::size_t>(a)];
    Initiation init = initiate(*sc_, world_, a, act, world_.seq);
    if (init.illegal) {
      std::string target;
      if (act.target) {
        target = *act.target < sc_->network.size() ? sc_->network.id(*act.target)
                                                   : "#" + std::to_string(*act.target);
      }
      record(IllegalRecord{a, act.kind, target, *init.illegal, t});
      out.illegal[static_cast<std::size_t>(a)] = true;
      continue;
    }
    if (act.kind == ActionKind::Wait) continue;
    const double score = action_score(cfg.rewards, act.kind, init.band);
    step_actions += score;
    record(InitiateRecord{a, act.kind, *act.target, t, init.band, init.delay, init.revealed, score});
    if (init.immediate) {
      record(ResolveRecord{a, act.kind, *act.target, t, init.immediate->success, init.immediate->after});
    }
  }

  // (2) win check, before the attacker moves
  bool any_infected = false, any_contained = false;
  for (NodeIdx i : sc_->network.action_targets()) {
    any_infected = any_infected || world_.nodes[i].stage.infected();
    any_contained = any_contained || world_.nodes[i].contained;
  }
  if (!any_infected && !any_contained && t + 1 < cfg.horizon_T) world_.outcome = Outcome::Win;

  // (3)+(4) attacker; a critical infection latches the loss inside the phase
  if (!terminal() && cfg.attacker.enabled) {
    auto events = attacker_step(*sc_, world_, streams_.attacker);
    for (const auto& e : events) {
      record(AttackRecord{e});
      if (e.kind == AttackEvent::Kind::LateralSuccess) ever_infected_.insert(e.target);
    }
    // (5) alerts
    if (!terminal()) {
      auto candidates = alert_candidates(sc_->network, events);
      record_alerts(candidates);
    }
  }

  // (6) time
  world_.t = t + 1;
  if (!terminal() && world_.t >= cfg.horizon_T) world_.outcome = Outcome::Draw;
  if (terminal()) record(TerminationRecord{world_.outcome, world_.t});

  // (7) rewards and views
  action_total_ += step_actions;
  generic_ += cfg.rewards.contained_clean_per_step * contained_clean();
  const double intrinsic = cfg.rewards.action_weight * step_actions / n;
  out.rewards.assign(static_cast<std::size_t>(n), intrinsic);
  if (terminal()) {
    finish();
    const double global = global_reward(
        {breakdown_.mission, breakdown_.state_generic, breakdown_.state_specific, 0.0}, cfg.rewards);
    for (auto& r : out.rewards) r += global / n;
    out.breakdown = breakdown_;
  }
  for (double r : out.rewards) delivered_ += r;
  out.terminal = terminal();
  out.outcome = world_.outcome;
  out.views = views();
  return out;
}

inline void Episode::finish() {
  const auto& rc = sc_->config.rewards;
  generic_ += rc.contained_clean_at_end * contained_clean();
  std::array<int, kNumNodeKinds> counts{};
  for (NodeIdx i : ever_infected_) ++counts[static_cast<int>(sc_->network.kind(i))];
  RewardComponents c{mission_reward(world_.outcome), generic_, state_specific_from_counts(rc, counts),
                     action_total_};
  breakdown_ = compose_and_split(c, rc, num_agents());

  TraceFooter f;
  f.outcome = world_.outcome;
  f.length = world_.t;
  f.breakdown = breakdown_;
  f.final_nodes = world_.nodes;
  trace_.footer = f;
}

// ---------------------------------------------------------------------------
// Policies and whole-episode runs.

struct PolicyInput {
  int agent = 0;
  const DefenderView& view;
  std::span<const DefenderAction> legal;
  Rng& rng;
};

using Policy = std::function<DefenderAction(const PolicyInput&)>;

// outcome, length and breakdown come from the engine's own accumulators.
struct EpisodeResult {
  Trace trace;
  double delivered_total = 0.0;
  bool valid = true;
  Outcome outcome = Outcome::None;
  int length = 0;
  RewardBreakdown breakdown;
};

// Runs to termination. A throwing policy aborts the episode and the trace is
// returned flagged invalid.
inline EpisodeResult run_episode(std::shared_ptr<const Scenario> sc, std::uint64_t seed,
                                 std::uint64_t episode_index, std::span<const Policy> policies) {
  Episode ep(std::move(sc), seed, episode_index);
  if (policies.size() != static_cast<std::size_t>(ep.num_agents())) {
    throw std::invalid_argument("one policy per defender required");
  }
  auto views = ep.views();
  std::vector<DefenderAction> joint(policies.size());
  try {
    while (!ep.terminal()) {
      for (int a = 0; a < ep.num_agents(); ++a) {
        auto legal = ep.legal(a);
        joint[static_cast<std::size_t>(a)] =
            policies[static_cast<std::size_t>(a)](PolicyInput{a, views[static_cast<std::size_t>(a)], legal,
                                                              ep.policy_rng()});
      }
      views = ep.step(joint).views;
    }
  } catch (const std::exception& e) {
    ep.abort(e.what());
    return {ep.trace(), ep.delivered_total(), false, ep.world().outcome, ep.world().t, {}};
  }
  return {ep.trace(), ep.delivered_total(), true, ep.world().outcome, ep.world().t, ep.breakdown()};
}

}  // namespace ipmsrl
