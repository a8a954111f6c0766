#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipmsrl/config.hpp"
#include "ipmsrl/rng.hpp"

namespace ipmsrl {

using json = nlohmann::ordered_json;
using NodeIdx = std::size_t;

namespace detail {

// Reads one JSON object, rejecting keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ConfigError(child(key), "missing required key");
    return *v;
  }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(child(key), "expected a number");
    return v->get<double>();
  }

  double probability(const std::string& key, double def) {
    double p = number(key, def);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(child(key), "probability out of range [0,1]");
    }
    return p;
  }

  int integer(const std::string& key, int def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(child(key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(child(key), "expected a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(child(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::array<int, kNumBands> read_delay_row(const json& v, const std::string& path) {
  if (!v.is_array() || (v.size() != 3 && v.size() != 4)) {
    throw ConfigError(path, "expected [low, med, high] or [none, low, med, high]");
  }
  std::array<int, kNumBands> row{};
  const std::size_t off = v.size() == 3 ? 1 : 0;
  if (off) row[0] = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() || v[i].get<int>() < 0) {
      throw ConfigError(path + "[" + std::to_string(i) + "]",
                        "delay must be a non-negative integer");
    }
    row[i + off] = v[i].get<int>();
  }
  for (int b = 1; b < kNumBands; ++b) {
    if (row[b] < row[b - 1]) throw ConfigError(path, "delay must be monotone in severity");
  }
  return row;
}

inline std::array<double, kNumBands> read_score_row(const json& v, const std::string& path) {
  if (!v.is_array() || (v.size() != 3 && v.size() != 4)) {
    throw ConfigError(path, "expected [low, med, high] or [none, low, med, high]");
  }
  std::array<double, kNumBands> row{};
  const std::size_t off = v.size() == 3 ? 1 : 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || v[i].get<double>() > 0.0) {
      throw ConfigError(path + "[" + std::to_string(i) + "]",
                        "action score must be a non-positive number");
    }
    row[i + off] = v[i].get<double>();
  }
  if (off) row[0] = row[1];
  for (int b = 1; b < kNumBands; ++b) {
    if (row[b] > row[b - 1]) {
      throw ConfigError(path, "action score must not decrease in penalty with severity");
    }
  }
  return row;
}

}  // namespace detail

// Effective adjacency over the attack surface, plus the derived distances.
// Nodes are stored sorted by id; NodeIdx values index that order.
class Network {
 public:
  // A single ring link of the dual backbone: ring 0 or 1, link k joins
  // backbone[k] and backbone[(k+1) % n].
  struct RingLink {
    int ring = 0;
    std::size_t position = 0;
  };

  explicit Network(const TopologySpec& spec, std::span<const RingLink> failed = {}) {
    build(spec, failed);
  }

  std::size_t size() const { return ids_.size(); }
  const std::string& id(NodeIdx i) const { return ids_[i]; }
  NodeKind kind(NodeIdx i) const { return kinds_[i]; }
  bool critical(NodeIdx i) const { return is_critical(kinds_[i]); }
  bool participates(NodeIdx i) const { return participates_[i]; }
  bool infectable(NodeIdx i) const { return participates_[i] && !critical(i); }

  std::optional<NodeIdx> find(const std::string& id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<NodeIdx>(it - ids_.begin());
  }

  const std::vector<NodeIdx>& neighbors(NodeIdx i) const { return adj_[i]; }
  bool adjacent(NodeIdx a, NodeIdx b) const {
    return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
  }

  // Lateral hops to the nearest critical node; 0 for critical nodes, -1 for
  // nodes outside the attack surface.
  int distance_to_critical(NodeIdx i) const { return dist_[i]; }
  const std::vector<int>& distances() const { return dist_; }

  // Non-critical infectable nodes; the node set of every defender view.
  const std::vector<NodeIdx>& observed_nodes() const { return observed_; }
  // Every node a targeted action may name (attack surface incl. critical).
  const std::vector<NodeIdx>& action_targets() const { return targets_; }
  const std::vector<NodeIdx>& critical_nodes() const { return criticals_; }

 private:
  void build(const TopologySpec& spec, std::span<const RingLink> failed);

  std::vector<std::string> ids_;
  std::vector<NodeKind> kinds_;
  std::vector<bool> participates_;
  std::vector<std::vector<NodeIdx>> adj_;
  std::vector<int> dist_;
  std::vector<NodeIdx> observed_;
  std::vector<NodeIdx> targets_;
  std::vector<NodeIdx> criticals_;
};

inline void Network::build(const TopologySpec& spec, std::span<const RingLink> failed) {
  const std::string p = "topology";
  if (spec.nodes.empty()) throw ConfigError(p + ".nodes", "no nodes");

  std::vector<NodeSpec> nodes = spec.nodes;
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.empty()) throw ConfigError(p + ".nodes", "empty node id");
    if (i > 0 && nodes[i].id == nodes[i - 1].id) {
      throw ConfigError(p + ".nodes", "duplicate node id '" + nodes[i].id + "'");
    }
    ids_.push_back(nodes[i].id);
    kinds_.push_back(nodes[i].kind);
  }
  const std::size_t n = ids_.size();

  auto index = [&](const std::string& id, const std::string& where) {
    auto f = find(id);
    if (!f) throw ConfigError(where, "unknown node id '" + id + "'");
    return *f;
  };

  std::vector<NodeIdx> backbone;
  std::vector<int> backbone_pos(n, -1);
  for (std::size_t k = 0; k < spec.backbone.size(); ++k) {
    const std::string where = p + ".backbone[" + std::to_string(k) + "]";
    NodeIdx s = index(spec.backbone[k], where);
    if (kinds_[s] != NodeKind::Switch) {
      throw ConfigError(where, "backbone node '" + ids_[s] + "' is not a Switch");
    }
    if (backbone_pos[s] >= 0) throw ConfigError(where, "duplicate backbone switch");
    backbone_pos[s] = static_cast<int>(k);
    backbone.push_back(s);
  }
  for (NodeIdx i = 0; i < n; ++i) {
    if (kinds_[i] == NodeKind::Switch && backbone_pos[i] < 0) {
      throw ConfigError(p + ".backbone", "switch '" + ids_[i] + "' is not on the backbone");
    }
  }

  participates_.assign(n, false);
  for (NodeIdx i = 0; i < n; ++i) {
    participates_[i] = kinds_[i] != NodeKind::Switch || spec.switches_infectable;
  }

  // Backbone connectivity over ring links and explicit switch-switch links.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[root(a)] = root(b); };
  const std::size_t nb = backbone.size();
  for (int ring = 0; ring < 2; ++ring) {
    for (std::size_t k = 0; k < nb; ++k) {
      bool down = std::any_of(failed.begin(), failed.end(), [&](const RingLink& l) {
        return l.ring == ring && l.position == k;
      });
      if (!down) unite(backbone[k], backbone[(k + 1) % nb]);
    }
  }

  std::vector<std::set<NodeIdx>> adj(n);
  std::vector<std::vector<NodeIdx>> attached(n);  // node -> backbone switches
  for (std::size_t k = 0; k < spec.links.size(); ++k) {
    const std::string where = p + ".links[" + std::to_string(k) + "]";
    NodeIdx a = index(spec.links[k].a, where);
    NodeIdx b = index(spec.links[k].b, where);
    if (a == b) throw ConfigError(where, "self link on '" + ids_[a] + "'");
    const bool sa = kinds_[a] == NodeKind::Switch;
    const bool sb = kinds_[b] == NodeKind::Switch;
    if (sa && sb) unite(a, b);
    if (sa) attached[b].push_back(a);
    if (sb) attached[a].push_back(b);
    if (participates_[a] && participates_[b]) {
      adj[a].insert(b);
      adj[b].insert(a);
    }
  }
  if (spec.switches_infectable) {
    for (NodeIdx s : backbone) attached[s].push_back(s);
  }

  // Nodes attached to connected backbone switches are mutually adjacent.
  std::map<std::size_t, std::vector<NodeIdx>> by_component;
  for (NodeIdx i = 0; i < n; ++i) {
    if (!participates_[i]) continue;
    std::set<std::size_t> comps;
    for (NodeIdx s : attached[i]) comps.insert(root(s));
    for (std::size_t c : comps) by_component[c].push_back(i);
  }
  for (auto& [comp, members] : by_component) {
    for (NodeIdx a : members) {
      for (NodeIdx b : members) {
        if (a != b) adj[a].insert(b);
      }
    }
  }

  adj_.resize(n);
  for (NodeIdx i = 0; i < n; ++i) adj_[i].assign(adj[i].begin(), adj[i].end());

  for (NodeIdx i = 0; i < n; ++i) {
    if (!participates_[i]) continue;
    targets_.push_back(i);
    if (critical(i)) {
      criticals_.push_back(i);
      bool has_plc = false;
      for (const auto& l : spec.links) {
        auto a = *find(l.a), b = *find(l.b);
        if ((a == i && kinds_[b] == NodeKind::PLC) || (b == i && kinds_[a] == NodeKind::PLC)) {
          has_plc = true;
        }
      }
      if (!has_plc) {
        throw ConfigError(p + ".links", "critical node '" + ids_[i] + "' has no link to a PLC");
      }
    } else {
      observed_.push_back(i);
    }
  }
  if (criticals_.empty()) throw ConfigError(p + ".nodes", "no critical nodes");
  if (observed_.empty()) throw ConfigError(p + ".nodes", "no infectable non-critical nodes");

  // Connectivity of the attack surface.
  {
    std::vector<bool> seen(n, false);
    std::deque<NodeIdx> q{targets_.front()};
    seen[targets_.front()] = true;
    while (!q.empty()) {
      NodeIdx u = q.front();
      q.pop_front();
      for (NodeIdx v : adj_[u]) {
        if (!seen[v]) {
          seen[v] = true;
          q.push_back(v);
        }
      }
    }
    for (NodeIdx i : targets_) {
      if (!seen[i]) {
        throw ConfigError(p + ".links", "adjacency graph is disconnected at '" + ids_[i] + "'");
      }
    }
  }

  // Multi-source BFS from critical nodes; paths never pass through a
  // critical node.
  dist_.assign(n, -1);
  std::deque<NodeIdx> q;
  for (NodeIdx c : criticals_) {
    dist_[c] = 0;
    q.push_back(c);
  }
  while (!q.empty()) {
    NodeIdx u = q.front();
    q.pop_front();
    if (dist_[u] > 0 || critical(u)) {
      for (NodeIdx v : adj_[u]) {
        if (dist_[v] < 0 && !critical(v)) {
          dist_[v] = dist_[u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  for (NodeIdx i : observed_) {
    if (dist_[i] < 0) {
      throw ConfigError(p + ".links", "node '" + ids_[i] + "' cannot reach a critical node");
    }
  }
}

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline TopologySpec read_topology(const json& j) {
  ObjectReader r(j, "topology");
  TopologySpec t;
  const json& nodes = r.require("nodes");
  if (!nodes.is_array()) throw ConfigError("topology.nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "topology.nodes[" + std::to_string(i) + "]";
    ObjectReader nr(nodes[i], path);
    NodeSpec ns;
    ns.id = nr.string("id", "");
    if (ns.id.empty()) throw ConfigError(path + ".id", "missing or empty node id");
    const std::string kind = nr.string("kind", "");
    auto k = parse_node_kind(kind);
    if (!k) throw ConfigError(path + ".kind", "unknown node kind '" + kind + "'");
    ns.kind = *k;
    nr.finish();
    t.nodes.push_back(std::move(ns));
  }
  if (const json* links = r.find("links")) {
    if (!links->is_array()) throw ConfigError("topology.links", "expected an array");
    for (std::size_t i = 0; i < links->size(); ++i) {
      const json& l = (*links)[i];
      if (!l.is_array() || l.size() != 2 || !l[0].is_string() || !l[1].is_string()) {
        throw ConfigError("topology.links[" + std::to_string(i) + "]",
                          "expected a pair of node ids");
      }
      t.links.push_back({l[0].get<std::string>(), l[1].get<std::string>()});
    }
  }
  if (const json* bb = r.find("backbone")) {
    if (!bb->is_array()) throw ConfigError("topology.backbone", "expected an array");
    for (std::size_t i = 0; i < bb->size(); ++i) {
      if (!(*bb)[i].is_string()) {
        throw ConfigError("topology.backbone[" + std::to_string(i) + "]", "expected a node id");
      }
      t.backbone.push_back((*bb)[i].get<std::string>());
    }
  }
  t.switches_infectable = r.boolean("switches_infectable", false);
  r.finish();
  return t;
}

inline AttackerConfig read_attacker(const json& j) {
  ObjectReader r(j, "attacker");
  AttackerConfig a;
  a.enabled = r.boolean("enabled", a.enabled);
  a.targeting_theta = r.probability("targeting_theta", a.targeting_theta);
  a.p_progress = r.probability("p_progress", a.p_progress);
  a.p_lateral_success = r.probability("p_lateral_success", a.p_lateral_success);
  a.initial_node = r.string("initial_node", a.initial_node);
  a.initial_stage = r.integer("initial_stage", a.initial_stage);
  if (a.initial_stage < 1 || a.initial_stage > Stage::kMax) {
    throw ConfigError("attacker.initial_stage", "must be in [1,12]");
  }
  a.exclusive_action = r.boolean("exclusive_action", a.exclusive_action);
  r.finish();
  return a;
}

inline DelayTable read_delays(const json& j) {
  ObjectReader r(j, "delays");
  DelayTable d;
  for (ActionKind a : kTargetedActions) {
    const std::string key(to_string(a));
    if (const json* v = r.find(key)) {
      d.steps[static_cast<int>(a)] = read_delay_row(*v, r.child(key));
    }
  }
  r.finish();
  return d;
}

inline RewardConfig read_rewards(const json& j) {
  ObjectReader r(j, "rewards");
  RewardConfig rc;
  const std::string preset = r.string("preset", "balanced");
  if (preset == "balanced") {
    rc.preset = RewardPreset::Balanced;
  } else if (preset == "state_only") {
    rc.preset = RewardPreset::StateOnly;
  } else {
    throw ConfigError("rewards.preset", "expected 'balanced' or 'state_only'");
  }
  auto weight = [&](const std::string& key, double def) {
    double w = r.number(key, def);
    if (w < 0.0) throw ConfigError(r.child(key), "weight must be non-negative");
    return w;
  };
  rc.mission_weight = weight("mission_weight", rc.mission_weight);
  rc.state_weight = weight("state_weight", rc.state_weight);
  rc.action_weight = weight("action_weight", rc.action_weight);
  if (rc.preset == RewardPreset::StateOnly) {
    rc.mission_weight = 0.0;
    rc.action_weight = 0.0;
  }

  if (const json* g = r.find("state_generic")) {
    ObjectReader gr(*g, "rewards.state_generic");
    auto penalty = [&](const std::string& key, double def) {
      double v = gr.number(key, def);
      if (v > 0.0) throw ConfigError(gr.child(key), "penalty must be non-positive");
      return v;
    };
    rc.contained_clean_per_step = penalty("contained_clean_per_step", rc.contained_clean_per_step);
    rc.contained_clean_at_end = penalty("contained_clean_at_end", rc.contained_clean_at_end);
    gr.finish();
  }

  if (const json* s = r.find("state_specific")) {
    ObjectReader sr(*s, "rewards.state_specific");
    for (int k = 0; k < kNumNodeKinds; ++k) {
      const std::string key(to_string(static_cast<NodeKind>(k)));
      const json* levels = sr.find(key);
      if (!levels) continue;
      const std::string path = sr.child(key);
      if (!levels->is_array() || levels->size() > 3) {
        throw ConfigError(path, "expected up to three {min_count, penalty} levels");
      }
      std::vector<SpecificLevel> out;
      for (std::size_t i = 0; i < levels->size(); ++i) {
        const std::string lp = path + "[" + std::to_string(i) + "]";
        ObjectReader lr((*levels)[i], lp);
        SpecificLevel lvl;
        lvl.min_count = lr.integer("min_count", 1);
        lvl.penalty = lr.number("penalty", 0.0);
        lr.finish();
        if (lvl.min_count < 1) throw ConfigError(lp + ".min_count", "must be >= 1");
        if (lvl.penalty > 0.0) throw ConfigError(lp + ".penalty", "penalty must be non-positive");
        if (!out.empty() && lvl.min_count <= out.back().min_count) {
          throw ConfigError(lp + ".min_count", "levels must have increasing min_count");
        }
        out.push_back(lvl);
      }
      rc.state_specific[k] = std::move(out);
    }
    sr.finish();
  }

  if (const json* a = r.find("action_score")) {
    ObjectReader ar(*a, "rewards.action_score");
    for (ActionKind k : kTargetedActions) {
      const std::string key(to_string(k));
      if (const json* v = ar.find(key)) {
        rc.action_score[static_cast<int>(k)] = read_score_row(*v, ar.child(key));
      }
    }
    ar.finish();
  }
  r.finish();
  return rc;
}

inline AlertTriggers read_triggers(const json& j) {
  if (!j.is_array()) throw ConfigError("alert_triggers", "expected an array of trigger names");
  AlertTriggers t{false, false, false, false};
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = j[i].is_string() ? j[i].get<std::string>() : "";
    if (name == "initial_attempt") {
      t.initial_attempt = true;
    } else if (name == "progression") {
      t.progression = true;
    } else if (name == "lateral_source") {
      t.lateral_source = true;
    } else if (name == "lateral_target") {
      t.lateral_target = true;
    } else {
      throw ConfigError("alert_triggers[" + std::to_string(i) + "]", "unknown trigger");
    }
  }
  return t;
}

}  // namespace detail

// Validates the attacker's initial node against the materialized network.
inline void validate_against_network(const ScenarioConfig& c, const Network& net) {
  const auto& init = c.attacker.initial_node;
  if (init != "random" && init != "none") {
    auto i = net.find(init);
    if (!i) throw ConfigError("attacker.initial_node", "unknown node id '" + init + "'");
    if (!net.infectable(*i)) {
      throw ConfigError("attacker.initial_node",
                        "'" + init + "' is not a non-critical infectable node");
    }
  }
}

// Parses and validates a scenario document. Pure: identical text yields an
// identical config.
inline ScenarioConfig load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  detail::ObjectReader r(doc, "");
  ScenarioConfig c;
  r.string("description", "");
  c.topology = detail::read_topology(r.require("topology"));
  c.horizon_T = r.integer("horizon_T", c.horizon_T);
  if (c.horizon_T < 1) throw ConfigError("horizon_T", "must be >= 1");
  c.num_defenders = r.integer("num_defenders", c.num_defenders);
  if (c.num_defenders < 1) throw ConfigError("num_defenders", "must be >= 1");
  if (const json* a = r.find("attacker")) c.attacker = detail::read_attacker(*a);
  c.alert_success_prob = r.probability("alert_success_prob", c.alert_success_prob);
  if (const json* t = r.find("alert_triggers")) c.alert_triggers = detail::read_triggers(*t);
  if (const json* d = r.find("delays")) c.delays = detail::read_delays(*d);
  if (const json* rw = r.find("rewards")) c.rewards = detail::read_rewards(*rw);
  if (const json* kc = r.find("kill_chain")) {
    detail::ObjectReader kr(*kc, "kill_chain");
    c.kill_chain.lateral_gate_stage = kr.integer("lateral_gate_stage", 7);
    if (c.kill_chain.lateral_gate_stage < 1 || c.kill_chain.lateral_gate_stage > Stage::kMax) {
      throw ConfigError("kill_chain.lateral_gate_stage", "must be in [1,12]");
    }
    if (const json* sb = kr.find("severity_bands")) {
      if (!sb->is_array() || sb->size() != 2 || !(*sb)[0].is_number_integer() ||
          !(*sb)[1].is_number_integer()) {
        throw ConfigError("kill_chain.severity_bands", "expected [low_max, medium_max]");
      }
      c.kill_chain.low_max = (*sb)[0].get<int>();
      c.kill_chain.medium_max = (*sb)[1].get<int>();
      if (!(1 <= c.kill_chain.low_max && c.kill_chain.low_max < c.kill_chain.medium_max &&
            c.kill_chain.medium_max < Stage::kMax)) {
        throw ConfigError("kill_chain.severity_bands", "need 1 <= low_max < medium_max < 12");
      }
    }
    kr.finish();
  }
  if (const json* d = r.find("defense")) {
    detail::ObjectReader dr(*d, "defense");
    c.contain_freezes_progression = dr.boolean("contain_freezes_progression", true);
    dr.finish();
  }
  if (const json* s = r.find("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = s->get<std::uint64_t>();
  }
  r.finish();

  Network net(c.topology);
  validate_against_network(c, net);
  return c;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

// Canonical document with every default filled in.
inline json to_json(const ScenarioConfig& c) {
  json j;
  json topo;
  topo["nodes"] = json::array();
  for (const auto& n : c.topology.nodes) {
    topo["nodes"].push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind))}});
  }
  topo["links"] = json::array();
  for (const auto& l : c.topology.links) topo["links"].push_back({l.a, l.b});
  topo["backbone"] = c.topology.backbone;
  topo["switches_infectable"] = c.topology.switches_infectable;
  j["topology"] = topo;
  j["horizon_T"] = c.horizon_T;
  j["num_defenders"] = c.num_defenders;
  j["attacker"] = {{"enabled", c.attacker.enabled},
                   {"targeting_theta", c.attacker.targeting_theta},
                   {"p_progress", c.attacker.p_progress},
                   {"p_lateral_success", c.attacker.p_lateral_success},
                   {"initial_node", c.attacker.initial_node},
                   {"initial_stage", c.attacker.initial_stage},
                   {"exclusive_action", c.attacker.exclusive_action}};
  j["alert_success_prob"] = c.alert_success_prob;
  json triggers = json::array();
  if (c.alert_triggers.initial_attempt) triggers.push_back("initial_attempt");
  if (c.alert_triggers.progression) triggers.push_back("progression");
  if (c.alert_triggers.lateral_source) triggers.push_back("lateral_source");
  if (c.alert_triggers.lateral_target) triggers.push_back("lateral_target");
  j["alert_triggers"] = triggers;
  json delays;
  for (ActionKind a : kTargetedActions) {
    delays[std::string(to_string(a))] = c.delays.steps[static_cast<int>(a)];
  }
  j["delays"] = delays;
  json rw;
  rw["preset"] = c.rewards.preset == RewardPreset::Balanced ? "balanced" : "state_only";
  rw["mission_weight"] = c.rewards.mission_weight;
  rw["state_weight"] = c.rewards.state_weight;
  rw["action_weight"] = c.rewards.action_weight;
  rw["state_generic"] = {{"contained_clean_per_step", c.rewards.contained_clean_per_step},
                         {"contained_clean_at_end", c.rewards.contained_clean_at_end}};
  json spec = json::object();
  for (int k = 0; k < kNumNodeKinds; ++k) {
    json levels = json::array();
    for (const auto& l : c.rewards.state_specific[k]) {
      levels.push_back({{"min_count", l.min_count}, {"penalty", l.penalty}});
    }
    spec[std::string(to_string(static_cast<NodeKind>(k)))] = levels;
  }
  rw["state_specific"] = spec;
  json scores;
  for (ActionKind a : kTargetedActions) {
    scores[std::string(to_string(a))] = c.rewards.action_score[static_cast<int>(a)];
  }
  rw["action_score"] = scores;
  j["rewards"] = rw;
  j["kill_chain"] = {{"lateral_gate_stage", c.kill_chain.lateral_gate_stage},
                     {"severity_bands", {c.kill_chain.low_max, c.kill_chain.medium_max}}};
  j["defense"] = {{"contain_freezes_progression", c.contain_freezes_progression}};
  j["seed"] = c.seed;
  return j;
}

inline std::uint64_t config_hash(const ScenarioConfig& c) { return fnv1a64(to_json(c).dump()); }

// An immutable, validated scenario: config plus materialized network.
struct Scenario {
  ScenarioConfig config;
  Network network;

  explicit Scenario(ScenarioConfig c) : config(std::move(c)), network(config.topology) {
    validate_against_network(config, network);
  }
};

inline std::shared_ptr<const Scenario> make_scenario(ScenarioConfig c) {
  return std::make_shared<const Scenario>(std::move(c));
}

}  // namespace ipmsrl
