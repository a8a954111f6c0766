#pragma once

#include <array>
#include <set>
#include <variant>

#include "ipmsrl/trace.hpp"

namespace ipmsrl {

struct RewardComponents {
  double mission = 0.0;
  double state_generic = 0.0;
  double state_specific = 0.0;
  double action_score_total = 0.0;
  bool operator==(const RewardComponents&) const = default;
};

constexpr double mission_reward(Outcome o) {
  switch (o) {
    case Outcome::Win: return 1.0;
    case Outcome::Loss: return -1.0;
    default: return 0.0;
  }
}

inline double action_score(const RewardConfig& rc, ActionKind a, SeverityBand b) {
  return rc.score(a, b);
}

// Penalty of the highest level whose min_count is reached.
inline double specific_level_penalty(const std::vector<SpecificLevel>& levels, int count) {
  double p = 0.0;
  for (const auto& l : levels) {
    if (count >= l.min_count) p = l.penalty;
  }
  return p;
}

inline double state_specific_from_counts(const RewardConfig& rc,
                                         const std::array<int, kNumNodeKinds>& counts) {
  double total = 0.0;
  for (int k = 0; k < kNumNodeKinds; ++k) total += specific_level_penalty(rc.state_specific[k], counts[k]);
  return total;
}

inline double state_weighted(double generic, double specific) { return 0.5 * generic + 0.5 * specific; }

inline RewardBreakdown compose_and_split(const RewardComponents& c, const RewardConfig& rc,
                                         int num_defenders) {
  RewardBreakdown b;
  b.mission = c.mission;
  b.state_generic = c.state_generic;
  b.state_specific = c.state_specific;
  b.action_score_total = c.action_score_total;
  b.total = rc.mission_weight * c.mission + rc.state_weight * state_weighted(c.state_generic, c.state_specific) +
            rc.action_weight * c.action_score_total;
  b.per_agent_share = b.total / num_defenders;
  return b;
}

// Global (end-of-episode) part of the total, before splitting.
inline double global_reward(const RewardComponents& c, const RewardConfig& rc) {
  return rc.mission_weight * c.mission + rc.state_weight * state_weighted(c.state_generic, c.state_specific);
}

// ---------------------------------------------------------------------------
// Components recomputed from a trace. Accumulation order is canonical and
// matches the engine: action scores summed per step then added to the
// total; contained-and-clean node-steps counted at every step end; the
// end-of-episode condition counted once after the final step.

namespace detail {

inline int count_contained_clean(const WorldState& w, const Network& net) {
  int n = 0;
  for (NodeIdx i = 0; i < w.nodes.size(); ++i) {
    if (net.participates(i) && w.nodes[i].contained && !w.nodes[i].stage.infected()) ++n;
  }
  return n;
}

}  // namespace detail

inline RewardComponents components_from_trace(const Scenario& sc, const Trace& trace) {
  const RewardConfig& rc = sc.config.rewards;
  TraceReducer red(sc, trace.header.num_agents);
  RewardComponents c;
  double step_actions = 0.0;
  bool in_step = false;
  std::set<NodeIdx> infected;

  auto end_step = [&] {
    c.action_score_total += step_actions;
    step_actions = 0.0;
    c.state_generic += rc.contained_clean_per_step *
                       detail::count_contained_clean(red.world(), sc.network);
  };

  for (const auto& rec : trace.events) {
    if (std::holds_alternative<StepRecord>(rec) && in_step) end_step();
    red.apply(rec);
    if (std::holds_alternative<StepRecord>(rec)) in_step = true;
    if (const auto* r = std::get_if<ResetRecord>(&rec); r && r->node) infected.insert(*r->node);
    if (const auto* r = std::get_if<InitiateRecord>(&rec)) step_actions += r->score;
    if (const auto* r = std::get_if<AttackRecord>(&rec);
        r && r->event.kind == AttackEvent::Kind::LateralSuccess) {
      infected.insert(r->event.target);
    }
    if (const auto* r = std::get_if<TerminationRecord>(&rec)) {
      if (in_step) end_step();
      in_step = false;
      c.state_generic += rc.contained_clean_at_end *
                         detail::count_contained_clean(red.world(), sc.network);
      c.mission = mission_reward(r->outcome);
    }
  }

  std::array<int, kNumNodeKinds> counts{};
  for (NodeIdx n : infected) ++counts[static_cast<int>(sc.network.kind(n))];
  c.state_specific = state_specific_from_counts(rc, counts);
  return c;
}

inline double state_generic(const Scenario& sc, const Trace& t) { return components_from_trace(sc, t).state_generic; }
inline double state_specific(const Scenario& sc, const Trace& t) { return components_from_trace(sc, t).state_specific; }

inline RewardBreakdown breakdown_from_trace(const Scenario& sc, const Trace& t) {
  return compose_and_split(components_from_trace(sc, t), sc.config.rewards, t.header.num_agents);
}

}  // namespace ipmsrl
