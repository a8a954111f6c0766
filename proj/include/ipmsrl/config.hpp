#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipmsrl/kill_chain.hpp"

namespace ipmsrl {

enum class NodeKind { HMI, RTU, LOP, PLC, Switch, CriticalCWP, CriticalPropulsion };

inline constexpr int kNumNodeKinds = 7;

constexpr bool is_critical(NodeKind k) {
  return k == NodeKind::CriticalCWP || k == NodeKind::CriticalPropulsion;
}

constexpr std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::HMI: return "HMI";
    case NodeKind::RTU: return "RTU";
    case NodeKind::LOP: return "LOP";
    case NodeKind::PLC: return "PLC";
    case NodeKind::Switch: return "Switch";
    case NodeKind::CriticalCWP: return "CWP";
    case NodeKind::CriticalPropulsion: return "Propulsion";
  }
  return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
  for (int i = 0; i < kNumNodeKinds; ++i) {
    auto k = static_cast<NodeKind>(i);
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

enum class ActionKind { Contain = 0, Eradicate = 1, Recover = 2, Wait = 3 };

// Actions that take a target, in action-id order.
inline constexpr std::array<ActionKind, 3> kTargetedActions = {
    ActionKind::Contain, ActionKind::Eradicate, ActionKind::Recover};

constexpr std::string_view to_string(ActionKind a) {
  switch (a) {
    case ActionKind::Contain: return "contain";
    case ActionKind::Eradicate: return "eradicate";
    case ActionKind::Recover: return "recover";
    case ActionKind::Wait: return "wait";
  }
  return "?";
}

inline std::optional<ActionKind> parse_action_kind(std::string_view s) {
  for (auto a : {ActionKind::Contain, ActionKind::Eradicate, ActionKind::Recover,
                 ActionKind::Wait}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

// Thrown for any scenario schema or invariant violation. The message starts
// with the JSON path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::HMI;
  bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
  std::string a;
  std::string b;
  bool operator==(const LinkSpec&) const = default;
};

struct TopologySpec {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<std::string> backbone;  // ring order
  bool switches_infectable = false;
  bool operator==(const TopologySpec&) const = default;
};

struct AttackerConfig {
  bool enabled = true;
  double targeting_theta = 1.0;  // 1 = fully targeted, 0 = fully viral
  double p_progress = 0.5;
  double p_lateral_success = 0.5;
  std::string initial_node = "random";  // node id, "random" or "none"
  int initial_stage = 1;
  bool exclusive_action = false;
  bool operator==(const AttackerConfig&) const = default;
};

// Delay in timesteps per (targeted action, severity band of the target at
// initiation). Wait is always immediate.
struct DelayTable {
  std::array<std::array<int, kNumBands>, 3> steps = {{
      {0, 0, 1, 1},  // contain
      {0, 1, 2, 3},  // eradicate
      {0, 1, 1, 2},  // recover
  }};

  int lookup(ActionKind a, SeverityBand b) const {
    if (a == ActionKind::Wait) return 0;
    return steps[static_cast<int>(a)][static_cast<int>(b)];
  }
  bool operator==(const DelayTable&) const = default;
};

struct AlertTriggers {
  bool initial_attempt = true;
  bool progression = true;
  bool lateral_source = true;
  bool lateral_target = true;
  bool operator==(const AlertTriggers&) const = default;
};

enum class RewardPreset { Balanced, StateOnly };

struct SpecificLevel {
  int min_count = 1;
  double penalty = 0.0;
  bool operator==(const SpecificLevel&) const = default;
};

struct RewardConfig {
  RewardPreset preset = RewardPreset::Balanced;
  double mission_weight = 1.0;
  double state_weight = 1.0;
  double action_weight = 1.0;
  double contained_clean_per_step = -0.01;
  double contained_clean_at_end = -0.05;
  // Indexed by NodeKind; levels ordered low, med, high by min_count.
  std::array<std::vector<SpecificLevel>, kNumNodeKinds> state_specific = {{
      {{1, -0.05}},              // HMI
      {{1, -0.1}, {2, -0.2}},    // RTU
      {{1, -0.1}, {2, -0.2}},    // LOP
      {{1, -0.2}, {2, -0.4}},    // PLC
      {},                        // Switch
      {},                        // CWP
      {},                        // Propulsion
  }};
  std::array<std::array<double, kNumBands>, 3> action_score = {{
      {-0.01, -0.01, -0.02, -0.04},
      {-0.01, -0.01, -0.02, -0.04},
      {-0.01, -0.01, -0.02, -0.04},
  }};

  double score(ActionKind a, SeverityBand b) const {
    if (a == ActionKind::Wait) return 0.0;
    return action_score[static_cast<int>(a)][static_cast<int>(b)];
  }
  bool operator==(const RewardConfig&) const = default;
};

struct ScenarioConfig {
  TopologySpec topology;
  int horizon_T = 50;
  int num_defenders = 2;
  AttackerConfig attacker;
  double alert_success_prob = 1.0;
  AlertTriggers alert_triggers;
  DelayTable delays;
  RewardConfig rewards;
  KillChainConfig kill_chain;
  bool contain_freezes_progression = true;
  std::uint64_t seed = 0;
  bool operator==(const ScenarioConfig&) const = default;
};

}  // namespace ipmsrl
