#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipmsrl/world.hpp"

namespace ipmsrl {

struct DefenderAction {
  ActionKind kind = ActionKind::Wait;
  std::optional<NodeIdx> target;

  static DefenderAction wait() { return {}; }
  static DefenderAction contain(NodeIdx n) { return {ActionKind::Contain, n}; }
  static DefenderAction eradicate(NodeIdx n) { return {ActionKind::Eradicate, n}; }
  static DefenderAction recover(NodeIdx n) { return {ActionKind::Recover, n}; }

  bool operator==(const DefenderAction&) const = default;
};

// True while the agent's pending action will still be outstanding when it
// next acts. Pending actions resolving at the current timestep resolve before
// initiations, so they do not block.
inline bool agent_busy(const WorldState& w, int agent) {
  const auto& p = w.pending[static_cast<std::size_t>(agent)];
  return p.has_value() && p->resolves_at > w.t;
}

inline int busy_remaining(const WorldState& w, int agent) {
  return agent_busy(w, agent) ? w.pending[static_cast<std::size_t>(agent)]->resolves_at - w.t : 0;
}

// Legal action kinds for `agent` on `node`.
inline std::vector<ActionKind> legal_actions(const Scenario& sc, const WorldState& w, int agent,
                                             NodeIdx node) {
  if (agent_busy(w, agent) || !sc.network.participates(node)) return {ActionKind::Wait};
  if (sc.network.critical(node)) return {ActionKind::Recover, ActionKind::Wait};
  return {ActionKind::Contain, ActionKind::Eradicate, ActionKind::Recover, ActionKind::Wait};
}

// Empty when legal; otherwise why the action is downgraded to Wait.
inline std::optional<std::string> illegal_reason(const Scenario& sc, const WorldState& w,
                                                 int agent, const DefenderAction& a) {
  if (a.kind == ActionKind::Wait) return std::nullopt;
  if (!a.target) return "missing target";
  if (*a.target >= sc.network.size() || !sc.network.participates(*a.target)) {
    return "unknown target";
  }
  if (agent_busy(w, agent)) return "agent busy";
  if (sc.network.critical(*a.target) && a.kind != ActionKind::Recover) {
    return "only recover or wait on a critical node";
  }
  return std::nullopt;
}

struct ResolveResult {
  bool success = true;
  NodeState after;
};

// Effect of an action on a node, evaluated against the node's state at
// resolution time. Recover fails while the node is still infected.
inline ResolveResult apply_effect(ActionKind a, NodeState s) {
  switch (a) {
    case ActionKind::Contain:
      s.contained = true;
      s.operational = false;
      return {true, s};
    case ActionKind::Eradicate:
      s.stage = Stage{};
      return {true, s};
    case ActionKind::Recover:
      if (s.stage.infected()) return {false, s};
      s.contained = false;
      s.operational = true;
      return {true, s};
    case ActionKind::Wait:
      break;
  }
  return {true, s};
}

inline ResolveResult resolve(const PendingAction& p, WorldState& w) {
  ResolveResult r = apply_effect(p.action, w.nodes[p.target]);
  w.nodes[p.target] = r.after;
  w.pending[static_cast<std::size_t>(p.agent)].reset();
  return r;
}

struct Initiation {
  std::optional<std::string> illegal;  // set when downgraded to Wait
  SeverityBand band = SeverityBand::None;
  int delay = 0;
  NodeState revealed;                    // ground truth seen by the actor
  std::optional<ResolveResult> immediate;  // delay 0
};

// Starts `a` for `agent`. The acting agent learns the target's ground truth
// now; the effect lands after the delay for the target's current severity.
// `seq` stamps the interaction for recency ordering.
inline Initiation initiate(const Scenario& sc, WorldState& w, int agent, const DefenderAction& a,
                           std::uint64_t seq) {
  Initiation out;
  out.illegal = illegal_reason(sc, w, agent, a);
  if (out.illegal || a.kind == ActionKind::Wait) return out;

  const NodeIdx target = *a.target;
  out.revealed = w.nodes[target];
  out.band = severity(out.revealed.stage, sc.config.kill_chain);
  out.delay = sc.config.delays.lookup(a.kind, out.band);
  w.interactions[static_cast<std::size_t>(agent)][target] =
      Interaction{w.t, out.revealed.stage, seq};

  PendingAction p{agent, a.kind, target, w.t, w.t + out.delay};
  if (out.delay == 0) {
    out.immediate = resolve(p, w);
  } else {
    w.pending[static_cast<std::size_t>(agent)] = p;
  }
  return out;
}

// Discrete action ids: 0 = Wait, then 1 + 3*k + {contain, eradicate, recover}
// for the k-th action target in node-id order.
class ActionSpace {
 public:
  explicit ActionSpace(const Network& net) : targets_(net.action_targets()) {
    position_.assign(net.size(), -1);
    for (std::size_t k = 0; k < targets_.size(); ++k) position_[targets_[k]] = static_cast<int>(k);
  }

  std::size_t size() const { return 1 + 3 * targets_.size(); }
  const std::vector<NodeIdx>& targets() const { return targets_; }

  std::optional<DefenderAction> decode(std::int64_t id) const {
    if (id == 0) return DefenderAction::wait();
    if (id < 0 || static_cast<std::size_t>(id) >= size()) return std::nullopt;
    const auto k = static_cast<std::size_t>(id - 1);
    return DefenderAction{kTargetedActions[k % 3], targets_[k / 3]};
  }

  std::optional<std::size_t> encode(const DefenderAction& a) const {
    if (a.kind == ActionKind::Wait) return 0;
    if (!a.target || *a.target >= position_.size() || position_[*a.target] < 0) {
      return std::nullopt;
    }
    return 1 + 3 * static_cast<std::size_t>(position_[*a.target]) +
           static_cast<std::size_t>(a.kind);
  }

  std::vector<std::uint8_t> mask(const Scenario& sc, const WorldState& w, int agent) const {
    std::vector<std::uint8_t> m(size(), 0);
    m[0] = 1;
    for (std::size_t id = 1; id < size(); ++id) {
      m[id] = illegal_reason(sc, w, agent, *decode(static_cast<std::int64_t>(id))) ? 0 : 1;
    }
    return m;
  }

  std::vector<DefenderAction> legal(const Scenario& sc, const WorldState& w, int agent) const {
    std::vector<DefenderAction> out;
    auto m = mask(sc, w, agent);
    for (std::size_t id = 0; id < size(); ++id) {
      if (m[id]) out.push_back(*decode(static_cast<std::int64_t>(id)));
    }
    return out;
  }

 private:
  std::vector<NodeIdx> targets_;
  std::vector<int> position_;
};

}  // namespace ipmsrl
