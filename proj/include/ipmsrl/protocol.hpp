#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipmsrl/engine.hpp"

namespace ipmsrl {

inline constexpr std::string_view kProtocolVersion = "ipmsrl-proto/1";

// One protocol session: a line of JSON in, exactly one line of JSON out.
//
//   hello -> (reset -> (act -> step_result)* -> episode_end)*
//
// Malformed requests get an error and leave the session as it was. Requests
// out of order get an error and drop any running episode.
class Session {
 public:
  explicit Session(std::shared_ptr<const Scenario> sc) : sc_(std::move(sc)), space_(sc_->network) {}

  std::string handle(const std::string& line) { return handle_json(line).dump(); }

  json handle_json(const std::string& line) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::parse_error& e) {
      return error(nullptr, "malformed", std::string("invalid JSON: ") + e.what());
    }
    if (!req.is_object()) return error(nullptr, "malformed", "request must be a JSON object");
    const json id = req.contains("id") ? req["id"] : json(nullptr);
    if (!id.is_number_integer()) return error(id, "bad_id", "request id must be an integer");
    const auto idv = id.get<std::int64_t>();
    if (last_id_ && idv <= *last_id_) return error(id, "bad_id", "request ids must increase");
    last_id_ = idv;
    if (!req.contains("type") || !req["type"].is_string()) return error(id, "malformed", "missing type");
    const std::string type = req["type"].get<std::string>();
    try {
      if (type == "hello") return on_hello(id, req);
      if (type == "reset") return on_reset(id, req);
      if (type == "obs") return on_obs(id);
      if (type == "act") return on_act(id, req);
    } catch (const json::exception& e) {
      return error(id, "bad_request", e.what());
    }
    return error(id, "unknown_type", "unknown request type '" + type + "'");
  }

  bool greeted() const { return greeted_; }
  bool in_episode() const { return episode_.has_value(); }
  const Episode* episode() const { return episode_ ? &*episode_ : nullptr; }

 private:
  json error(const json& id, const std::string& code, const std::string& message) const {
    return {{"type", "error"}, {"id", id}, {"code", code}, {"message", message}};
  }

  json order_error(const json& id, const std::string& message) {
    episode_.reset();
    return error(id, "protocol_order", message);
  }

  json on_hello(const json& id, const json& req) {
    if (req.contains("protocol") && req["protocol"] != std::string(kProtocolVersion)) {
      return error(id, "version_mismatch", "server speaks " + std::string(kProtocolVersion));
    }
    greeted_ = true;
    episode_.reset();
    json agents = json::array();
    for (int a = 0; a < sc_->config.num_defenders; ++a) agents.push_back(a);
    json targets = json::array();
    for (NodeIdx n : space_.targets()) targets.push_back(sc_->network.id(n));
    return {{"type", "hello"},
            {"id", id},
            {"protocol", std::string(kProtocolVersion)},
            {"layout", std::string(kObservationLayout)},
            {"agents", agents},
            {"obs_length", encoded_length(sc_->network.observed_nodes().size())},
            {"horizon_T", sc_->config.horizon_T},
            {"config_hash", config_hash(sc_->config)},
            {"action_space",
             {{"size", space_.size()},
              {"kinds", {"contain", "eradicate", "recover"}},
              {"targets", targets},
              {"encoding", "0 = wait; 1 + 3*k + j targets[k] with kinds[j]"}}}};
  }

  json on_reset(const json& id, const json& req) {
    if (!greeted_) return order_error(id, "reset before hello");
    if (!req.contains("seed") || !req["seed"].is_number_unsigned()) {
      return error(id, "bad_request", "reset needs a non-negative integer seed");
    }
    const auto seed = req["seed"].get<std::uint64_t>();
    std::uint64_t index = 0;
    if (req.contains("episode_index")) {
      if (!req["episode_index"].is_number_unsigned()) return error(id, "bad_request", "bad episode_index");
      index = req["episode_index"].get<std::uint64_t>();
    }
    record_trace_ = req.value("record_trace", false);
    episode_.emplace(sc_, seed, index);
    json out = observation(id, "obs", episode_->views());
    return out;
  }

  json on_obs(const json& id) {
    if (!episode_) return order_error(id, "no episode running");
    return observation(id, "obs", episode_->views());
  }

  json on_act(const json& id, const json& req) {
    if (!episode_) return order_error(id, "act without a running episode");
    const auto n = static_cast<std::size_t>(sc_->config.num_defenders);
    if (!req.contains("actions") || !req["actions"].is_array() || req["actions"].size() != n) {
      return error(id, "bad_request", "actions must be an array with one entry per agent");
    }
    std::vector<DefenderAction> joint;
    for (const auto& a : req["actions"]) {
      auto act = parse_action(a);
      if (!act) return error(id, "bad_request", "unrecognised action " + a.dump());
      joint.push_back(*act);
    }
    StepResult r = episode_->step(joint);
    json out = observation(id, r.terminal ? "episode_end" : "step_result", r.views);
    out["rewards"] = r.rewards;
    json illegal = json::array();
    for (bool b : r.illegal) illegal.push_back(b);
    out["illegal"] = illegal;
    out["terminal"] = r.terminal;
    if (r.terminal) {
      const auto& b = *r.breakdown;
      out["outcome"] = std::string(to_string(r.outcome));
      out["length"] = episode_->world().t;
      out["breakdown"] = {{"mission", b.mission},
                          {"state_generic", b.state_generic},
                          {"state_specific", b.state_specific},
                          {"action_score_total", b.action_score_total},
                          {"total", b.total},
                          {"per_agent_share", b.per_agent_share}};
      if (record_trace_) {
        json lines = json::array();
        std::istringstream in(to_ndjson(episode_->trace(), sc_->network));
        for (std::string l; std::getline(in, l);) lines.push_back(json::parse(l));
        out["trace"] = lines;
      }
      episode_.reset();
    }
    return out;
  }

  // An integer action id, or {"kind": ..., "target": node id}.
  std::optional<DefenderAction> parse_action(const json& a) const {
    if (a.is_number_integer()) return space_.decode(a.get<std::int64_t>());
    if (!a.is_object() || !a.contains("kind") || !a["kind"].is_string()) return std::nullopt;
    auto kind = parse_action_kind(a["kind"].get<std::string>());
    if (!kind) return std::nullopt;
    if (*kind == ActionKind::Wait) return DefenderAction::wait();
    if (!a.contains("target") || !a["target"].is_string()) return std::nullopt;
    auto node = sc_->network.find(a["target"].get<std::string>());
    if (!node) return std::nullopt;
    return DefenderAction{*kind, *node};
  }

  json observation(const json& id, const char* type, const std::vector<DefenderView>& views) const {
    json obs = json::array();
    json masks = json::array();
    for (int a = 0; a < sc_->config.num_defenders; ++a) {
      obs.push_back(encode(views[static_cast<std::size_t>(a)]));
      masks.push_back(space_.mask(*sc_, episode_->world(), a));
    }
    return {{"type", type}, {"id", id}, {"t", episode_->world().t}, {"obs", obs}, {"masks", masks}};
  }

  std::shared_ptr<const Scenario> sc_;
  ActionSpace space_;
  std::optional<Episode> episode_;
  std::optional<std::int64_t> last_id_;
  bool greeted_ = false;
  bool record_trace_ = false;
};

}  // namespace ipmsrl
