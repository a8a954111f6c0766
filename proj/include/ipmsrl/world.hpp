#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ipmsrl/scenario.hpp"

namespace ipmsrl {

// Ground truth for one node.
struct NodeState {
  Stage stage;
  bool contained = false;
  bool operational = true;
  bool operator==(const NodeState&) const = default;
};

struct PendingAction {
  int agent = 0;
  ActionKind action = ActionKind::Wait;
  NodeIdx target = 0;
  int initiated_at = 0;
  int resolves_at = 0;
  bool operator==(const PendingAction&) const = default;
};

enum class AlertTrigger { InitialInfectionAttempt, StageProgression, LateralMoveSource, LateralMoveTarget };

constexpr std::string_view to_string(AlertTrigger t) {
  switch (t) {
    case AlertTrigger::InitialInfectionAttempt: return "initial_attempt";
    case AlertTrigger::StageProgression: return "progression";
    case AlertTrigger::LateralMoveSource: return "lateral_source";
    case AlertTrigger::LateralMoveTarget: return "lateral_target";
  }
  return "?";
}

inline std::optional<AlertTrigger> parse_alert_trigger(std::string_view s) {
  for (auto t : {AlertTrigger::InitialInfectionAttempt, AlertTrigger::StageProgression,
                 AlertTrigger::LateralMoveSource, AlertTrigger::LateralMoveTarget}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

// A SIEM alert. Immutable once stored; `seq` orders it against interactions.
struct Alert {
  NodeIdx node = 0;
  Stage stage_at_alert;
  int timestep = 0;
  AlertTrigger trigger = AlertTrigger::StageProgression;
  std::uint64_t seq = 0;
  bool operator==(const Alert&) const = default;
};

// What one agent learned by acting on a node.
struct Interaction {
  int timestep = 0;
  Stage stage;
  std::uint64_t seq = 0;
  bool operator==(const Interaction&) const = default;
};

struct AttackEvent {
  enum class Kind { Progression, LateralAttempt, LateralSuccess };
  Kind kind = Kind::Progression;
  int timestep = 0;
  NodeIdx source = 0;
  NodeIdx target = 0;  // lateral events only
  Stage stage;         // new stage of source (progression) or target (success)
  bool operator==(const AttackEvent&) const = default;
};

constexpr std::string_view to_string(AttackEvent::Kind k) {
  switch (k) {
    case AttackEvent::Kind::Progression: return "progression";
    case AttackEvent::Kind::LateralAttempt: return "lateral_attempt";
    case AttackEvent::Kind::LateralSuccess: return "lateral_success";
  }
  return "?";
}

enum class Outcome { None, Win, Draw, Loss };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::None: return "none";
    case Outcome::Win: return "win";
    case Outcome::Draw: return "draw";
    case Outcome::Loss: return "loss";
  }
  return "?";
}

inline std::optional<Outcome> parse_outcome(std::string_view s) {
  for (auto o : {Outcome::None, Outcome::Win, Outcome::Draw, Outcome::Loss}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

// Episode outcome statistic: win 1, draw 0.5, loss 0.
constexpr double outcome_value(Outcome o) {
  switch (o) {
    case Outcome::Win: return 1.0;
    case Outcome::Draw: return 0.5;
    default: return 0.0;
  }
}

// Episode reward decomposition.
//   total = mission_weight*mission
//         + state_weight*(0.5*state_generic + 0.5*state_specific)
//         + action_weight*action_score_total
struct RewardBreakdown {
  double mission = 0.0;
  double state_generic = 0.0;
  double state_specific = 0.0;
  double action_score_total = 0.0;
  double total = 0.0;
  double per_agent_share = 0.0;
  bool operator==(const RewardBreakdown&) const = default;
};

// Latest alert per node.
using AlertStore = std::vector<std::optional<Alert>>;

struct WorldState {
  int t = 0;
  std::vector<NodeState> nodes;
  std::vector<std::optional<PendingAction>> pending;                // per agent
  AlertStore alerts;                                                // per node
  std::vector<std::vector<std::optional<Interaction>>> interactions;  // [agent][node]
  Outcome outcome = Outcome::None;
  std::uint64_t seq = 0;  // number of trace records emitted so far

  WorldState() = default;
  WorldState(std::size_t num_nodes, int num_agents)
      : nodes(num_nodes),
        pending(static_cast<std::size_t>(num_agents)),
        alerts(num_nodes),
        interactions(static_cast<std::size_t>(num_agents),
                     std::vector<std::optional<Interaction>>(num_nodes)) {}

  bool terminal() const { return outcome != Outcome::None; }
  bool operator==(const WorldState&) const = default;
};

inline bool any_critical_infected(const Network& net, const WorldState& w) {
  for (NodeIdx c : net.critical_nodes()) {
    if (w.nodes[c].stage.infected()) return true;
  }
  return false;
}

}  // namespace ipmsrl
