#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ipmsrl/rng.hpp"
#include "ipmsrl/world.hpp"

namespace ipmsrl {

// Node that the attacker compromises at reset, or nullopt when the scenario
// starts clean ("none"). Consumes one draw from `rng` only for "random".
inline std::optional<NodeIdx> initial_compromise(const Scenario& sc, Rng& rng) {
  const auto& name = sc.config.attacker.initial_node;
  if (name == "none") return std::nullopt;
  if (name == "random") {
    const auto& pool = sc.network.observed_nodes();
    return pool[rng.uniform_index(pool.size())];
  }
  return sc.network.find(name);
}

inline bool is_lateral_target_eligible(const Scenario& sc, const WorldState& w, NodeIdx n) {
  if (!sc.network.participates(n)) return false;
  const NodeState& s = w.nodes[n];
  return !s.contained && !s.stage.infected();
}

// With probability theta pick an eligible neighbour closest to a critical
// node (uniform tie-break); otherwise pick uniformly among eligible
// neighbours. No draws are consumed when nothing is eligible.
inline std::optional<NodeIdx> choose_lateral_target(const Scenario& sc, const WorldState& w,
                                                    NodeIdx source, double theta, Rng& rng) {
  std::vector<NodeIdx> eligible;
  for (NodeIdx n : sc.network.neighbors(source)) {
    if (is_lateral_target_eligible(sc, w, n)) eligible.push_back(n);
  }
  if (eligible.empty()) return std::nullopt;

  if (rng.bernoulli(theta)) {
    int best = std::numeric_limits<int>::max();
    for (NodeIdx n : eligible) best = std::min(best, sc.network.distance_to_critical(n));
    std::vector<NodeIdx> nearest;
    for (NodeIdx n : eligible) {
      if (sc.network.distance_to_critical(n) == best) nearest.push_back(n);
    }
    return nearest[rng.uniform_index(nearest.size())];
  }
  return eligible[rng.uniform_index(eligible.size())];
}

// One attacker phase. Acting nodes are those infected when the phase starts,
// visited in node-id order; each may progress and then attempt one lateral
// move. Stops at the first critical infection and latches the loss.
inline std::vector<AttackEvent> attacker_step(const Scenario& sc, WorldState& w, Rng& rng) {
  const auto& cfg = sc.config.attacker;
  const auto& kc = sc.config.kill_chain;
  std::vector<AttackEvent> events;

  std::vector<NodeIdx> actors;
  for (NodeIdx n : sc.network.observed_nodes()) {
    if (w.nodes[n].stage.infected()) actors.push_back(n);
  }

  for (NodeIdx n : actors) {
    NodeState& node = w.nodes[n];
    if (node.contained && sc.config.contain_freezes_progression) continue;

    bool progressed = false;
    if (node.stage.index() < Stage::kMax) {
      if (rng.bernoulli(cfg.p_progress)) {
        node.stage = advance(node.stage);
        progressed = true;
        events.push_back({AttackEvent::Kind::Progression, w.t, n, n, node.stage});
      }
    }

    if (node.contained) continue;
    if (cfg.exclusive_action && progressed) continue;
    if (!can_move_laterally(node.stage, kc)) continue;

    auto target = choose_lateral_target(sc, w, n, cfg.targeting_theta, rng);
    if (!target) continue;
    events.push_back({AttackEvent::Kind::LateralAttempt, w.t, n, *target, Stage{}});
    if (!rng.bernoulli(cfg.p_lateral_success)) continue;

    w.nodes[*target].stage = Stage(1);
    events.push_back({AttackEvent::Kind::LateralSuccess, w.t, n, *target, Stage(1)});
    if (sc.network.critical(*target)) {
      w.outcome = Outcome::Loss;
      break;
    }
  }
  return events;
}

}  // namespace ipmsrl
