#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ipmsrl/defense.hpp"
#include "ipmsrl/world.hpp"

namespace ipmsrl {

inline constexpr std::string_view kTraceVersion = "ipmsrl-trace/1";
inline constexpr std::string_view kObservationLayout = "ipmsrl-obs/1";

struct TraceHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t episode_index = 0;
  int num_agents = 0;
  json scenario;  // canonical scenario document
  bool operator==(const TraceHeader&) const = default;
};

struct ResetRecord {
  std::optional<NodeIdx> node;
  Stage stage;
  bool operator==(const ResetRecord&) const = default;
};

struct StepRecord {
  int t = 0;
  bool operator==(const StepRecord&) const = default;
};

struct InitiateRecord {
  int agent = 0;
  ActionKind action = ActionKind::Wait;
  NodeIdx target = 0;
  int t = 0;
  SeverityBand band = SeverityBand::None;
  int delay = 0;
  NodeState revealed;
  double score = 0.0;
  bool operator==(const InitiateRecord&) const = default;
};

struct ResolveRecord {
  int agent = 0;
  ActionKind action = ActionKind::Wait;
  NodeIdx target = 0;
  int t = 0;
  bool success = true;
  NodeState after;
  bool operator==(const ResolveRecord&) const = default;
};

struct IllegalRecord {
  int agent = 0;
  ActionKind action = ActionKind::Wait;
  std::string target;  // as requested; may not name a real node
  std::string reason;
  int t = 0;
  bool operator==(const IllegalRecord&) const = default;
};

struct AttackRecord {
  AttackEvent event;
  bool operator==(const AttackRecord&) const = default;
};

struct AlertRecord {
  Alert alert;
  bool operator==(const AlertRecord&) const = default;
};

struct TerminationRecord {
  Outcome outcome = Outcome::None;
  int t = 0;
  bool operator==(const TerminationRecord&) const = default;
};

using TraceRecord = std::variant<ResetRecord, StepRecord, InitiateRecord, ResolveRecord,
                                 IllegalRecord, AttackRecord, AlertRecord, TerminationRecord>;

struct TraceFooter {
  bool valid = true;
  std::string error;
  Outcome outcome = Outcome::None;
  int length = 0;
  RewardBreakdown breakdown;
  std::vector<NodeState> final_nodes;
  bool operator==(const TraceFooter&) const = default;
};

// One episode. events[i] has sequence number i.
struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> events;
  std::optional<TraceFooter> footer;
  bool operator==(const Trace&) const = default;
};

// ---------------------------------------------------------------------------
// Pure reducer: replays records onto an initial world.

class TraceReducer {
 public:
  TraceReducer(const Scenario& sc, int num_agents)
      : world_(sc.network.size(), num_agents) {}

  void apply(const TraceRecord& rec) {
    const std::uint64_t seq = world_.seq++;
    std::visit([&](const auto& r) { apply_one(r, seq); }, rec);
  }

  const WorldState& world() const { return world_; }

 private:
  void apply_one(const ResetRecord& r, std::uint64_t) {
    if (r.node) world_.nodes[*r.node].stage = r.stage;
  }
  void apply_one(const StepRecord& r, std::uint64_t) { world_.t = r.t; }
  void apply_one(const InitiateRecord& r, std::uint64_t seq) {
    const auto agent = static_cast<std::size_t>(r.agent);
    world_.interactions[agent][r.target] = Interaction{r.t, r.revealed.stage, seq};
    if (r.delay > 0) {
      world_.pending[agent] = PendingAction{r.agent, r.action, r.target, r.t, r.t + r.delay};
    }
  }
  void apply_one(const ResolveRecord& r, std::uint64_t) {
    world_.nodes[r.target] = r.after;
    world_.pending[static_cast<std::size_t>(r.agent)].reset();
  }
  void apply_one(const IllegalRecord&, std::uint64_t) {}
  void apply_one(const AttackRecord& r, std::uint64_t) {
    const auto& e = r.event;
    if (e.kind == AttackEvent::Kind::Progression) world_.nodes[e.source].stage = e.stage;
    if (e.kind == AttackEvent::Kind::LateralSuccess) world_.nodes[e.target].stage = e.stage;
  }
  void apply_one(const AlertRecord& r, std::uint64_t seq) {
    Alert a = r.alert;
    a.seq = seq;
    world_.alerts[a.node] = a;
  }
  void apply_one(const TerminationRecord& r, std::uint64_t) {
    world_.outcome = r.outcome;
    world_.t = r.t;
  }

  WorldState world_;
};

inline WorldState replay(const Scenario& sc, const Trace& trace) {
  TraceReducer red(sc, trace.header.num_agents);
  for (const auto& r : trace.events) red.apply(r);
  return red.world();
}

// ---------------------------------------------------------------------------
// NDJSON serialization. Node references are written as node ids.

namespace detail {

inline json node_state_json(const NodeState& s) {
  return {{"stage", s.stage.index()}, {"contained", s.contained}, {"operational", s.operational}};
}

inline NodeState node_state_from(const json& j) {
  return NodeState{Stage(j.at("stage").get<int>()), j.at("contained").get<bool>(),
                   j.at("operational").get<bool>()};
}

inline json breakdown_json(const RewardBreakdown& b) {
  return {{"mission", b.mission},
          {"state_generic", b.state_generic},
          {"state_specific", b.state_specific},
          {"action_score_total", b.action_score_total},
          {"total", b.total},
          {"per_agent_share", b.per_agent_share}};
}

inline RewardBreakdown breakdown_from(const json& j) {
  return RewardBreakdown{j.at("mission").get<double>(),       j.at("state_generic").get<double>(),
                         j.at("state_specific").get<double>(), j.at("action_score_total").get<double>(),
                         j.at("total").get<double>(),          j.at("per_agent_share").get<double>()};
}

inline SeverityBand band_from(const std::string& s) {
  for (auto b : {SeverityBand::None, SeverityBand::Low, SeverityBand::Medium, SeverityBand::High}) {
    if (to_string(b) == s) return b;
  }
  throw std::runtime_error("trace: unknown severity band '" + s + "'");
}

struct RecordWriter {
  const Network& net;

  json operator()(const ResetRecord& r) const {
    return {{"type", "reset"},
            {"node", r.node ? json(net.id(*r.node)) : json(nullptr)},
            {"stage", r.stage.index()}};
  }
  json operator()(const StepRecord& r) const { return {{"type", "step"}, {"t", r.t}}; }
  json operator()(const InitiateRecord& r) const {
    return {{"type", "initiate"},
            {"t", r.t},
            {"agent", r.agent},
            {"action", std::string(to_string(r.action))},
            {"target", net.id(r.target)},
            {"band", std::string(to_string(r.band))},
            {"delay", r.delay},
            {"revealed", node_state_json(r.revealed)},
            {"score", r.score}};
  }
  json operator()(const ResolveRecord& r) const {
    return {{"type", "resolve"},
            {"t", r.t},
            {"agent", r.agent},
            {"action", std::string(to_string(r.action))},
            {"target", net.id(r.target)},
            {"success", r.success},
            {"after", node_state_json(r.after)}};
  }
  json operator()(const IllegalRecord& r) const {
    return {{"type", "illegal"},
            {"t", r.t},
            {"agent", r.agent},
            {"action", std::string(to_string(r.action))},
            {"target", r.target},
            {"reason", r.reason}};
  }
  json operator()(const AttackRecord& r) const {
    const auto& e = r.event;
    json j = {{"type", "attack"},
              {"t", e.timestep},
              {"kind", std::string(to_string(e.kind))},
              {"source", net.id(e.source)}};
    if (e.kind != AttackEvent::Kind::Progression) j["target"] = net.id(e.target);
    if (e.kind != AttackEvent::Kind::LateralAttempt) j["stage"] = e.stage.index();
    return j;
  }
  json operator()(const AlertRecord& r) const {
    return {{"type", "alert"},
            {"t", r.alert.timestep},
            {"node", net.id(r.alert.node)},
            {"stage", r.alert.stage_at_alert.index()},
            {"trigger", std::string(to_string(r.alert.trigger))}};
  }
  json operator()(const TerminationRecord& r) const {
    return {{"type", "termination"}, {"t", r.t}, {"outcome", std::string(to_string(r.outcome))}};
  }
};

}  // namespace detail

inline json header_json(const TraceHeader& h) {
  return {{"type", "header"},
          {"version", std::string(kTraceVersion)},
          {"layout", std::string(kObservationLayout)},
          {"config_hash", h.config_hash},
          {"seed", h.seed},
          {"episode_index", h.episode_index},
          {"num_agents", h.num_agents},
          {"scenario", h.scenario}};
}

inline json record_json(const TraceRecord& r, const Network& net) {
  return std::visit(detail::RecordWriter{net}, r);
}

inline json footer_json(const TraceFooter& f, const Network& net) {
  json nodes = json::array();
  for (NodeIdx i = 0; i < f.final_nodes.size(); ++i) {
    json n = detail::node_state_json(f.final_nodes[i]);
    n["id"] = net.id(i);
    nodes.push_back(n);
  }
  json j = {{"type", "footer"},
            {"valid", f.valid},
            {"outcome", std::string(to_string(f.outcome))},
            {"length", f.length},
            {"breakdown", detail::breakdown_json(f.breakdown)},
            {"final_nodes", nodes}};
  if (!f.valid) j["error"] = f.error;
  return j;
}

inline std::string to_ndjson(const Trace& t, const Network& net) {
  std::string out = header_json(t.header).dump();
  out += '\n';
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    json j = record_json(t.events[i], net);
    j["seq"] = i;
    out += j.dump();
    out += '\n';
  }
  if (t.footer) {
    out += footer_json(*t.footer, net).dump();
    out += '\n';
  }
  return out;
}

struct ParsedTrace {
  std::shared_ptr<const Scenario> scenario;
  Trace trace;
};

inline ParsedTrace parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ParsedTrace out;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error("trace line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(e.what());
    }
    const std::string type = j.value("type", "");
    if (lineno == 1) {
      if (type != "header") throw fail("first record must be the header");
      if (j.value("version", "") != kTraceVersion) throw fail("unsupported trace version");
      auto& h = out.trace.header;
      h.config_hash = j.at("config_hash").get<std::uint64_t>();
      h.seed = j.at("seed").get<std::uint64_t>();
      h.episode_index = j.at("episode_index").get<std::uint64_t>();
      h.num_agents = j.at("num_agents").get<int>();
      h.scenario = j.at("scenario");
      out.scenario = make_scenario(load_scenario(h.scenario.dump()));
      continue;
    }
    if (!out.scenario) throw fail("missing header");
    if (type != "footer" && (!j.contains("seq") || j["seq"] != out.trace.events.size())) {
      throw fail("record seq must equal its position");
    }
    const Network& net = out.scenario->network;
    auto node = [&](const json& v) {
      auto i = net.find(v.get<std::string>());
      if (!i) throw fail("unknown node id " + v.dump());
      return *i;
    };
    auto action = [&](const json& v) {
      auto a = parse_action_kind(v.get<std::string>());
      if (!a) throw fail("unknown action " + v.dump());
      return *a;
    };
    if (type == "reset") {
      ResetRecord r;
      if (!j.at("node").is_null()) r.node = node(j.at("node"));
      r.stage = Stage(j.at("stage").get<int>());
      out.trace.events.emplace_back(r);
    } else if (type == "step") {
      out.trace.events.emplace_back(StepRecord{j.at("t").get<int>()});
    } else if (type == "initiate") {
      InitiateRecord r;
      r.t = j.at("t").get<int>();
      r.agent = j.at("agent").get<int>();
      r.action = action(j.at("action"));
      r.target = node(j.at("target"));
      r.band = detail::band_from(j.at("band").get<std::string>());
      r.delay = j.at("delay").get<int>();
      r.revealed = detail::node_state_from(j.at("revealed"));
      r.score = j.at("score").get<double>();
      out.trace.events.emplace_back(r);
    } else if (type == "resolve") {
      ResolveRecord r;
      r.t = j.at("t").get<int>();
      r.agent = j.at("agent").get<int>();
      r.action = action(j.at("action"));
      r.target = node(j.at("target"));
      r.success = j.at("success").get<bool>();
      r.after = detail::node_state_from(j.at("after"));
      out.trace.events.emplace_back(r);
    } else if (type == "illegal") {
      IllegalRecord r;
      r.t = j.at("t").get<int>();
      r.agent = j.at("agent").get<int>();
      r.action = action(j.at("action"));
      r.target = j.at("target").get<std::string>();
      r.reason = j.at("reason").get<std::string>();
      out.trace.events.emplace_back(r);
    } else if (type == "attack") {
      AttackEvent e;
      e.timestep = j.at("t").get<int>();
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "progression") {
        e.kind = AttackEvent::Kind::Progression;
      } else if (kind == "lateral_attempt") {
        e.kind = AttackEvent::Kind::LateralAttempt;
      } else if (kind == "lateral_success") {
        e.kind = AttackEvent::Kind::LateralSuccess;
      } else {
        throw fail("unknown attack kind '" + kind + "'");
      }
      e.source = node(j.at("source"));
      e.target = j.contains("target") ? node(j.at("target")) : e.source;
      if (j.contains("stage")) e.stage = Stage(j.at("stage").get<int>());
      out.trace.events.emplace_back(AttackRecord{e});
    } else if (type == "alert") {
      Alert a;
      a.timestep = j.at("t").get<int>();
      a.node = node(j.at("node"));
      a.stage_at_alert = Stage(j.at("stage").get<int>());
      auto trig = parse_alert_trigger(j.at("trigger").get<std::string>());
      if (!trig) throw fail("unknown alert trigger");
      a.trigger = *trig;
      a.seq = out.trace.events.size();
      out.trace.events.emplace_back(AlertRecord{a});
    } else if (type == "termination") {
      auto o = parse_outcome(j.at("outcome").get<std::string>());
      if (!o) throw fail("unknown outcome");
      out.trace.events.emplace_back(TerminationRecord{*o, j.at("t").get<int>()});
    } else if (type == "footer") {
      TraceFooter f;
      f.valid = j.at("valid").get<bool>();
      f.error = j.value("error", "");
      auto o = parse_outcome(j.at("outcome").get<std::string>());
      if (!o) throw fail("unknown outcome");
      f.outcome = *o;
      f.length = j.at("length").get<int>();
      f.breakdown = detail::breakdown_from(j.at("breakdown"));
      f.final_nodes.resize(net.size());
      for (const auto& n : j.at("final_nodes")) f.final_nodes[node(n.at("id"))] = detail::node_state_from(n);
      out.trace.footer = f;
    } else {
      throw fail("unknown record type '" + type + "'");
    }
  }
  if (!out.scenario) throw std::runtime_error("trace: empty input");
  return out;
}

}  // namespace ipmsrl
