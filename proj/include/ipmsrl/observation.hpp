#pragma once

#include <algorithm>
#include <vector>

#include "ipmsrl/defense.hpp"
#include "ipmsrl/world.hpp"

namespace ipmsrl {

struct NodeBelief {
  NodeIdx node = 0;
  int last_known_stage = -1;  // -1: never observed
  int info_age = -1;          // steps since that information, -1 if unknown
  bool contained = false;     // ground truth, globally visible
  bool operational = true;    // ground truth, globally visible
  bool operator==(const NodeBelief&) const = default;
};

// One defender's partial view. Nodes are the network's observed nodes in
// node-id order.
struct DefenderView {
  int agent = 0;
  int timestep = 0;
  int horizon = 1;
  std::vector<NodeBelief> nodes;
  bool own_busy = false;
  int busy_remaining = 0;
  bool operator==(const DefenderView&) const = default;
};

// Infection knowledge comes from the newest of the latest broadcast alert
// and this agent's own latest interaction with the node.
inline DefenderView build_view(const Scenario& sc, const WorldState& w, int agent) {
  DefenderView v;
  v.agent = agent;
  v.timestep = w.t;
  v.horizon = sc.config.horizon_T;
  v.own_busy = agent_busy(w, agent);
  v.busy_remaining = busy_remaining(w, agent);
  const auto& mine = w.interactions[static_cast<std::size_t>(agent)];
  for (NodeIdx n : sc.network.observed_nodes()) {
    NodeBelief b;
    b.node = n;
    b.contained = w.nodes[n].contained;
    b.operational = w.nodes[n].operational;
    const auto& alert = w.alerts[n];
    const auto& touch = mine[n];
    if (alert && (!touch || alert->seq > touch->seq)) {
      b.last_known_stage = alert->stage_at_alert.index();
      b.info_age = w.t - alert->timestep;
    } else if (touch) {
      b.last_known_stage = touch->stage.index();
      b.info_age = w.t - touch->timestep;
    }
    v.nodes.push_back(b);
  }
  return v;
}

inline std::vector<DefenderView> build_views(const Scenario& sc, const WorldState& w) {
  std::vector<DefenderView> out;
  for (int a = 0; a < sc.config.num_defenders; ++a) out.push_back(build_view(sc, w, a));
  return out;
}

inline std::size_t encoded_length(std::size_t num_observed_nodes) { return 5 * num_observed_nodes + 3; }

// Layout "ipmsrl-obs/1": per node
//   [known, last_known_stage/12, min(info_age,T)/T, contained, operational]
// then [own_busy, min(busy_remaining,T)/T, t/T]. Unknown nodes encode
// known=0, stage=0, age=1.
inline std::vector<double> encode(const DefenderView& v) {
  const double T = static_cast<double>(v.horizon);
  std::vector<double> out;
  out.reserve(encoded_length(v.nodes.size()));
  for (const auto& b : v.nodes) {
    const bool known = b.last_known_stage >= 0;
    out.push_back(known ? 1.0 : 0.0);
    out.push_back(known ? b.last_known_stage / 12.0 : 0.0);
    out.push_back(known ? std::min(b.info_age, v.horizon) / T : 1.0);
    out.push_back(b.contained ? 1.0 : 0.0);
    out.push_back(b.operational ? 1.0 : 0.0);
  }
  out.push_back(v.own_busy ? 1.0 : 0.0);
  out.push_back(std::min(v.busy_remaining, v.horizon) / T);
  out.push_back(std::min(v.timestep, v.horizon) / T);
  return out;
}

}  // namespace ipmsrl
