#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipmsrl/engine.hpp"

namespace ipmsrl {

// ---------------------------------------------------------------------------
// Scripted baselines

inline DefenderAction wait_policy(const PolicyInput&) { return DefenderAction::wait(); }

// Uniform over the legal (action, target) pairs.
inline DefenderAction random_policy(const PolicyInput& in) {
  if (in.legal.empty()) return DefenderAction::wait();
  return in.legal[in.rng.uniform_index(in.legal.size())];
}

namespace detail {

// Highest known stage, then freshest information, then lowest node id.
inline const NodeBelief* pick(const DefenderView& v, auto&& pred) {
  const NodeBelief* best = nullptr;
  for (const auto& b : v.nodes) {
    if (!pred(b)) continue;
    if (!best || b.last_known_stage > best->last_known_stage ||
        (b.last_known_stage == best->last_known_stage && b.info_age < best->info_age)) {
      best = &b;
    }
  }
  return best;
}

}  // namespace detail

// Contain, then eradicate, then recover, driven only by this agent's view.
inline DefenderAction heuristic_policy(const DefenderView& v) {
  if (v.own_busy) return DefenderAction::wait();
  if (auto* b = detail::pick(v, [](const NodeBelief& b) { return b.last_known_stage >= 1 && !b.contained; })) {
    return DefenderAction::contain(b->node);
  }
  if (auto* b = detail::pick(v, [](const NodeBelief& b) { return b.last_known_stage >= 1 && b.contained; })) {
    return DefenderAction::eradicate(b->node);
  }
  if (auto* b = detail::pick(v, [](const NodeBelief& b) { return b.last_known_stage == 0 && b.contained; })) {
    return DefenderAction::recover(b->node);
  }
  return DefenderAction::wait();
}

inline DefenderAction heuristic_policy(const PolicyInput& in) { return heuristic_policy(in.view); }

// ---------------------------------------------------------------------------
// Tabular Q-learning, one independent table per agent.

struct TabularQParams {
  double learning_rate = 0.1;
  double discount = 0.95;
  double epsilon = 0.1;
  bool operator==(const TabularQParams&) const = default;
};

struct QTransition {
  std::uint64_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::uint64_t next_state = 0;
  bool terminal = false;
  std::vector<std::size_t> next_legal;  // empty: max over every action
};

inline constexpr std::string_view kTabularQVersion = "ipmsrl-tabq/1";

class TabularQ {
 public:
  TabularQ(std::size_t num_actions, int num_agents, TabularQParams params = {})
      : num_actions_(num_actions), params_(params), tables_(static_cast<std::size_t>(num_agents)) {}

  // Coarsened view: per node (known severity band or unknown, contained),
  // plus own busy flag.
  static std::uint64_t state_key(const DefenderView& v, const KillChainConfig& kc = {}) {
    std::uint64_t key = 0x51ed270b27a1f3c5ULL;
    for (const auto& b : v.nodes) {
      int band = b.last_known_stage < 0 ? 0 : 1 + static_cast<int>(severity(Stage(b.last_known_stage), kc));
      key = mix64(key ^ static_cast<std::uint64_t>(band * 2 + (b.contained ? 1 : 0)));
    }
    return mix64(key ^ (v.own_busy ? 0xb0ULL : 0x1dULL));
  }

  const TabularQParams& params() const { return params_; }
  std::size_t num_actions() const { return num_actions_; }
  int num_agents() const { return static_cast<int>(tables_.size()); }

  double value(int agent, std::uint64_t state, std::size_t action) const {
    const auto& t = tables_[static_cast<std::size_t>(agent)];
    auto it = t.find(state);
    return it == t.end() ? 0.0 : it->second[action];
  }

  // Ties break toward the lowest action id.
  std::size_t greedy(int agent, std::uint64_t state, std::span<const std::size_t> legal) const {
    std::size_t best = legal.front();
    double best_v = value(agent, state, best);
    for (std::size_t a : legal) {
      double v = value(agent, state, a);
      if (v > best_v) {
        best = a;
        best_v = v;
      }
    }
    return best;
  }

  std::size_t act(int agent, std::uint64_t state, std::span<const std::size_t> legal, Rng& rng,
                  double epsilon) const {
    if (rng.bernoulli(epsilon)) return legal[rng.uniform_index(legal.size())];
    return greedy(agent, state, legal);
  }

  // One-step temporal-difference update.
  void update(int agent, const QTransition& tr) {
    double target = tr.reward;
    if (!tr.terminal) {
      double best = -std::numeric_limits<double>::infinity();
      if (tr.next_legal.empty()) {
        for (std::size_t a = 0; a < num_actions_; ++a) best = std::max(best, value(agent, tr.next_state, a));
      } else {
        for (std::size_t a : tr.next_legal) best = std::max(best, value(agent, tr.next_state, a));
      }
      target += params_.discount * best;
    }
    const double old = value(agent, tr.state, tr.action);
    const double updated = old + params_.learning_rate * (target - old);
    if (updated == old && !tables_[static_cast<std::size_t>(agent)].count(tr.state)) return;
    row(agent, tr.state)[tr.action] = updated;
  }

  std::size_t table_size(int agent) const { return tables_[static_cast<std::size_t>(agent)].size(); }

  json to_json() const {
    json j;
    j["version"] = std::string(kTabularQVersion);
    j["num_actions"] = num_actions_;
    j["params"] = {{"learning_rate", params_.learning_rate},
                   {"discount", params_.discount},
                   {"epsilon", params_.epsilon}};
    j["agents"] = json::array();
    for (const auto& t : tables_) {
      std::map<std::uint64_t, const std::vector<double>*> sorted;
      for (const auto& [k, v] : t) sorted[k] = &v;
      json rows = json::object();
      for (const auto& [k, v] : sorted) rows[std::to_string(k)] = *v;
      j["agents"].push_back(rows);
    }
    return j;
  }

  static TabularQ from_json(const json& j) {
    if (j.value("version", "") != kTabularQVersion) {
      throw std::runtime_error("tabular table: unsupported version");
    }
    TabularQParams p;
    p.learning_rate = j.at("params").at("learning_rate").get<double>();
    p.discount = j.at("params").at("discount").get<double>();
    p.epsilon = j.at("params").at("epsilon").get<double>();
    TabularQ q(j.at("num_actions").get<std::size_t>(), static_cast<int>(j.at("agents").size()), p);
    for (std::size_t a = 0; a < j.at("agents").size(); ++a) {
      for (const auto& [k, v] : j.at("agents")[a].items()) {
        auto values = v.get<std::vector<double>>();
        if (values.size() != q.num_actions_) throw std::runtime_error("tabular table: bad row width");
        q.tables_[a][std::stoull(k)] = std::move(values);
      }
    }
    return q;
  }

  bool operator==(const TabularQ& o) const {
    return num_actions_ == o.num_actions_ && params_ == o.params_ && tables_ == o.tables_;
  }

 private:
  std::vector<double>& row(int agent, std::uint64_t state) {
    auto& t = tables_[static_cast<std::size_t>(agent)];
    auto it = t.find(state);
    if (it == t.end()) it = t.emplace(state, std::vector<double>(num_actions_, 0.0)).first;
    return it->second;
  }

  std::size_t num_actions_;
  TabularQParams params_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<double>>> tables_;
};

inline std::vector<std::size_t> legal_ids(const ActionSpace& space, std::span<const DefenderAction> legal) {
  std::vector<std::size_t> ids;
  for (const auto& a : legal) {
    if (auto id = space.encode(a)) ids.push_back(*id);
  }
  return ids;
}

// Greedy (or epsilon-greedy with `epsilon` > 0) policy over a trained table.
inline Policy tabular_policy(std::shared_ptr<const TabularQ> q, std::shared_ptr<const Scenario> sc,
                             double epsilon = 0.0) {
  auto space = std::make_shared<ActionSpace>(sc->network);
  return [q, sc, space, epsilon](const PolicyInput& in) {
    auto ids = legal_ids(*space, in.legal);
    auto key = TabularQ::state_key(in.view, sc->config.kill_chain);
    return *space->decode(static_cast<std::int64_t>(q->act(in.agent, key, ids, in.rng, epsilon)));
  };
}

struct TrainingConfig {
  int episodes = 5000;
  std::uint64_t seed = 0;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  TabularQParams params;
};

// Independent learners; exploration decays linearly over the run.
inline TabularQ train_tabular_q(std::shared_ptr<const Scenario> sc, const TrainingConfig& cfg) {
  ActionSpace space(sc->network);
  const int n = sc->config.num_defenders;
  TabularQ q(space.size(), n, cfg.params);
  const auto& kc = sc->config.kill_chain;

  for (int e = 0; e < cfg.episodes; ++e) {
    const double frac = cfg.episodes > 1 ? static_cast<double>(e) / (cfg.episodes - 1) : 1.0;
    const double eps = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
    Episode ep(sc, cfg.seed, static_cast<std::uint64_t>(e));
    auto views = ep.views();
    std::vector<std::uint64_t> keys(static_cast<std::size_t>(n));
    std::vector<std::vector<std::size_t>> legal(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      keys[a] = TabularQ::state_key(views[a], kc);
      legal[a] = legal_ids(space, ep.legal(a));
    }
    while (!ep.terminal()) {
      std::vector<std::size_t> chosen(static_cast<std::size_t>(n));
      std::vector<DefenderAction> joint(static_cast<std::size_t>(n));
      for (int a = 0; a < n; ++a) {
        chosen[a] = q.act(a, keys[a], legal[a], ep.policy_rng(), eps);
        joint[a] = *space.decode(static_cast<std::int64_t>(chosen[a]));
      }
      StepResult r = ep.step(joint);
      for (int a = 0; a < n; ++a) {
        QTransition tr;
        tr.state = keys[a];
        tr.action = chosen[a];
        tr.reward = r.rewards[a];
        tr.terminal = r.terminal;
        tr.next_state = TabularQ::state_key(r.views[a], kc);
        if (!r.terminal) tr.next_legal = legal_ids(space, ep.legal(a));
        q.update(a, tr);
        keys[a] = tr.next_state;
        legal[a] = tr.next_legal;
      }
    }
  }
  return q;
}

}  // namespace ipmsrl
