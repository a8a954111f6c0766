#pragma once

#include <span>
#include <vector>

#include "ipmsrl/rng.hpp"
#include "ipmsrl/world.hpp"

namespace ipmsrl {

struct AlertCandidate {
  NodeIdx node = 0;
  AlertTrigger trigger = AlertTrigger::StageProgression;
};

inline bool trigger_enabled(const AlertTriggers& t, AlertTrigger k) {
  switch (k) {
    case AlertTrigger::InitialInfectionAttempt: return t.initial_attempt;
    case AlertTrigger::StageProgression: return t.progression;
    case AlertTrigger::LateralMoveSource: return t.lateral_source;
    case AlertTrigger::LateralMoveTarget: return t.lateral_target;
  }
  return false;
}

// Alert-eligible (node, trigger) pairs for a batch of attack events, in
// event order. Critical nodes carry no alert system.
inline std::vector<AlertCandidate> alert_candidates(const Network& net,
                                                    std::span<const AttackEvent> events) {
  std::vector<AlertCandidate> out;
  for (const auto& e : events) {
    switch (e.kind) {
      case AttackEvent::Kind::Progression:
        out.push_back({e.source, AlertTrigger::StageProgression});
        break;
      case AttackEvent::Kind::LateralAttempt:
        if (!net.critical(e.target)) out.push_back({e.target, AlertTrigger::InitialInfectionAttempt});
        break;
      case AttackEvent::Kind::LateralSuccess:
        out.push_back({e.source, AlertTrigger::LateralMoveSource});
        if (!net.critical(e.target)) out.push_back({e.target, AlertTrigger::LateralMoveTarget});
        break;
    }
  }
  return out;
}

// Each enabled candidate independently reaches the defenders with
// probability p_alert. Stage is read from ground truth at emission time.
// Returned alerts carry seq 0; the engine stamps them when recording.
inline std::vector<Alert> emit_alerts(std::span<const AlertCandidate> candidates,
                                      const AlertTriggers& enabled, double p_alert,
                                      const WorldState& w, Rng& rng) {
  std::vector<Alert> out;
  for (const auto& c : candidates) {
    if (!trigger_enabled(enabled, c.trigger)) continue;
    if (rng.bernoulli(p_alert)) {
      out.push_back(Alert{c.node, w.nodes[c.node].stage, w.t, c.trigger, 0});
    }
  }
  return out;
}

// Keeps the most recent alert per node; later entries supersede earlier ones.
inline void update_store(AlertStore& store, std::span<const Alert> alerts) {
  for (const auto& a : alerts) {
    auto& slot = store[a.node];
    if (!slot || slot->seq <= a.seq) slot = a;
  }
}

}  // namespace ipmsrl
