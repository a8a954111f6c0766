#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ipmsrl/agents.hpp"

namespace ipmsrl {

// ---------------------------------------------------------------------------
// Policy specs: "random", "heuristic", "wait" or "tabular:PATH".

struct PolicySpec {
  enum class Kind { Random, Heuristic, Wait, Tabular };
  Kind kind = Kind::Heuristic;
  std::string table_path;
  bool operator==(const PolicySpec&) const = default;
};

inline PolicySpec parse_policy_spec(const std::string& s) {
  if (s == "random") return {PolicySpec::Kind::Random, {}};
  if (s == "heuristic") return {PolicySpec::Kind::Heuristic, {}};
  if (s == "wait") return {PolicySpec::Kind::Wait, {}};
  if (s.rfind("tabular:", 0) == 0 && s.size() > 8) return {PolicySpec::Kind::Tabular, s.substr(8)};
  throw ConfigError("policy", "unknown policy '" + s + "'");
}

inline std::string to_string(const PolicySpec& p) {
  switch (p.kind) {
    case PolicySpec::Kind::Random: return "random";
    case PolicySpec::Kind::Heuristic: return "heuristic";
    case PolicySpec::Kind::Wait: return "wait";
    case PolicySpec::Kind::Tabular: return "tabular:" + p.table_path;
  }
  return "?";
}

inline std::shared_ptr<const TabularQ> load_tabular_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("policy", "cannot open table '" + path + "'");
  try {
    return std::make_shared<const TabularQ>(TabularQ::from_json(json::parse(in)));
  } catch (const std::exception& e) {
    throw ConfigError("policy", "bad table '" + path + "': " + e.what());
  }
}

// Builds one policy per agent. A single spec is shared by every agent.
// Tables are loaded here so failures surface before any episode runs.
inline std::vector<Policy> make_policies(const std::vector<PolicySpec>& specs,
                                         std::shared_ptr<const Scenario> sc) {
  const auto n = static_cast<std::size_t>(sc->config.num_defenders);
  if (specs.empty() || (specs.size() != 1 && specs.size() != n)) {
    throw ConfigError("policy", "expected 1 or " + std::to_string(n) + " policy specs");
  }
  std::vector<Policy> out;
  for (std::size_t a = 0; a < n; ++a) {
    const PolicySpec& p = specs.size() == 1 ? specs[0] : specs[a];
    switch (p.kind) {
      case PolicySpec::Kind::Random: out.emplace_back(random_policy); break;
      case PolicySpec::Kind::Wait: out.emplace_back(wait_policy); break;
      case PolicySpec::Kind::Heuristic:
        out.emplace_back([](const PolicyInput& in) { return heuristic_policy(in); });
        break;
      case PolicySpec::Kind::Tabular: {
        auto q = load_tabular_file(p.table_path);
        if (q->num_actions() != ActionSpace(sc->network).size() || q->num_agents() != static_cast<int>(n)) {
          throw ConfigError("policy", "table '" + p.table_path + "' does not match the scenario");
        }
        out.push_back(tabular_policy(q, sc));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

// Replaces the value at a dotted key path in the canonical scenario document.
// The new value must have the same JSON type as the one it replaces.
inline ScenarioConfig apply_override(const ScenarioConfig& base, const std::string& key_path, const json& value) {
  json doc = to_json(base);
  json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key_path.find('.', start);
    const std::string part = key_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty() || !cur->is_object() || !cur->contains(part)) {
      throw ConfigError(key_path, "sweep key does not exist in the scenario");
    }
    cur = &(*cur)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const bool same = (cur->is_number() && value.is_number() &&
                     (!cur->is_number_integer() || value.is_number_integer())) ||
                    (cur->is_boolean() && value.is_boolean()) || (cur->is_string() && value.is_string()) ||
                    (cur->is_array() && value.is_array()) || (cur->is_object() && value.is_object());
  if (!same) {
    throw ConfigError(key_path, "sweep value " + value.dump() + " does not match type of " + cur->dump());
  }
  *cur = value;
  return load_scenario(doc.dump());
}

struct SweepSpec {
  std::string key;
  std::vector<json> values;
};

struct ExperimentSpec {
  ScenarioConfig scenario;
  std::vector<PolicySpec> policies{PolicySpec{}};
  int episodes = 100;  // per seed
  std::uint64_t base_seed = 0;
  int seed_count = 1;
  std::optional<SweepSpec> sweep;
  std::string out_dir;  // empty: nothing written
  bool write_traces = false;
  int workers = 1;

  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> s;
    for (int j = 0; j < seed_count; ++j) s.push_back(base_seed + static_cast<std::uint64_t>(j));
    return s;
  }
};

// ---------------------------------------------------------------------------
// Metrics

struct EpisodeSummary {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::None;
  double reward = 0.0;
  int length = 0;
};

struct ConfigMetrics {
  std::string value;  // sweep value as JSON text, empty without a sweep
  int episodes = 0;
  int wins = 0;
  int draws = 0;
  int losses = 0;
  int invalid = 0;
  double outcome_mean = 0.0;
  double outcome_ci90 = 0.0;
  double reward_mean = 0.0;
  double reward_ci90 = 0.0;
  double length_mean = 0.0;
  double length_ci90 = 0.0;
  bool operator==(const ConfigMetrics&) const = default;
};

struct MetricsReport {
  std::string key;  // swept key, empty without a sweep
  std::vector<ConfigMetrics> rows;
  bool operator==(const MetricsReport&) const = default;
};

inline constexpr double kZ90 = 1.6448536269514722;

namespace detail {

// Half-width of a 90% normal interval over per-seed means. With a single
// seed the episodes themselves are the samples.
inline double ci90(const std::vector<std::vector<double>>& by_seed) {
  std::vector<double> samples;
  if (by_seed.size() >= 2) {
    for (const auto& s : by_seed) {
      double sum = 0.0;
      for (double x : s) sum += x;
      if (!s.empty()) samples.push_back(sum / static_cast<double>(s.size()));
    }
  } else if (!by_seed.empty()) {
    samples = by_seed[0];
  }
  const auto k = samples.size();
  if (k < 2) return 0.0;
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return kZ90 * std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
}

}  // namespace detail

// Summaries are grouped by seed in first-seen order.
inline ConfigMetrics aggregate(std::span<const EpisodeSummary> eps, int invalid = 0) {
  ConfigMetrics m;
  m.invalid = invalid;
  std::vector<std::uint64_t> order;
  std::map<std::uint64_t, std::size_t> slot;
  std::array<std::vector<std::vector<double>>, 3> by_seed;  // outcome, reward, length
  double so = 0.0, sr = 0.0, sl = 0.0;
  for (const auto& e : eps) {
    ++m.episodes;
    m.wins += e.outcome == Outcome::Win;
    m.draws += e.outcome == Outcome::Draw;
    m.losses += e.outcome == Outcome::Loss;
    so += outcome_value(e.outcome);
    sr += e.reward;
    sl += e.length;
    auto [it, fresh] = slot.emplace(e.seed, order.size());
    if (fresh) {
      order.push_back(e.seed);
      for (auto& v : by_seed) v.emplace_back();
    }
    by_seed[0][it->second].push_back(outcome_value(e.outcome));
    by_seed[1][it->second].push_back(e.reward);
    by_seed[2][it->second].push_back(static_cast<double>(e.length));
  }
  if (m.episodes > 0) {
    const double n = m.episodes;
    m.outcome_mean = so / n;
    m.reward_mean = sr / n;
    m.length_mean = sl / n;
  }
  m.outcome_ci90 = detail::ci90(by_seed[0]);
  m.reward_ci90 = detail::ci90(by_seed[1]);
  m.length_ci90 = detail::ci90(by_seed[2]);
  return m;
}

// Trace-only summary of one episode, with the scenario rebuilt from the
// trace header.
inline std::optional<EpisodeSummary> summarize_trace(const Scenario& sc, const Trace& t) {
  if (!t.footer || !t.footer->valid) return std::nullopt;
  const TerminationRecord* term = nullptr;
  for (const auto& r : t.events) {
    if (const auto* x = std::get_if<TerminationRecord>(&r)) term = x;
  }
  if (!term) return std::nullopt;
  return EpisodeSummary{t.header.seed, term->outcome, breakdown_from_trace(sc, t).total, term->t};
}

// Recomputes one configuration's metrics from traces alone.
inline ConfigMetrics summarize(std::span<const Trace> traces, std::string value = {}) {
  std::map<std::uint64_t, std::shared_ptr<const Scenario>> cache;
  std::vector<EpisodeSummary> eps;
  int invalid = 0;
  for (const auto& t : traces) {
    auto& sc = cache[t.header.config_hash];
    if (!sc) sc = make_scenario(load_scenario(t.header.scenario.dump()));
    if (auto s = summarize_trace(*sc, t)) {
      eps.push_back(*s);
    } else {
      ++invalid;
    }
  }
  ConfigMetrics m = aggregate(eps, invalid);
  m.value = std::move(value);
  return m;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const ConfigMetrics& m) {
  return {{"value", m.value.empty() ? json(nullptr) : json::parse(m.value)},
          {"episodes", m.episodes},
          {"wins", m.wins},
          {"draws", m.draws},
          {"losses", m.losses},
          {"invalid", m.invalid},
          {"episode_outcome_mean", m.outcome_mean},
          {"episode_outcome_ci90", m.outcome_ci90},
          {"episode_reward_mean", m.reward_mean},
          {"episode_reward_ci90", m.reward_ci90},
          {"episode_length_mean", m.length_mean},
          {"episode_length_ci90", m.length_ci90}};
}

inline json to_json(const MetricsReport& r) {
  json j;
  j["sweep_key"] = r.key.empty() ? json(nullptr) : json(r.key);
  j["configurations"] = json::array();
  for (const auto& m : r.rows) j["configurations"].push_back(to_json(m));
  return j;
}

inline constexpr std::string_view kCsvHeader =
    "sweep_key,sweep_value,episodes,wins,draws,losses,invalid,"
    "episode_outcome_mean,episode_outcome_ci90,episode_reward_mean,episode_reward_ci90,"
    "episode_length_mean,episode_length_ci90";

inline std::string to_csv(const MetricsReport& r) {
  std::string out(kCsvHeader);
  out += '\n';
  char buf[512];
  for (const auto& m : r.rows) {
    std::string value = m.value;
    if (value.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : value) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      value = q + "\"";
    }
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%d,%d,%d,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", r.key.c_str(),
                  value.c_str(), m.episodes, m.wins, m.draws, m.losses, m.invalid, m.outcome_mean, m.outcome_ci90,
                  m.reward_mean, m.reward_ci90, m.length_mean, m.length_ci90);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

struct ConfigRun {
  std::string value;
  std::shared_ptr<const Scenario> scenario;
  std::vector<EpisodeResult> episodes;  // seed-major, then episode index
};

struct ExperimentResult {
  MetricsReport report;  // from in-run values
  std::vector<ConfigRun> runs;
};

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.episodes < 1) throw ConfigError("episodes", "must be >= 1");
  if (spec.seed_count < 1) throw ConfigError("seeds", "must be >= 1");

  // Everything that can fail on configuration is resolved up front.
  std::vector<ConfigRun> runs;
  std::vector<std::vector<Policy>> policies;
  if (spec.sweep) {
    if (spec.sweep->values.empty()) throw ConfigError("sweep", "no values");
    for (const auto& v : spec.sweep->values) {
      runs.push_back({v.dump(), make_scenario(apply_override(spec.scenario, spec.sweep->key, v)), {}});
    }
  } else {
    runs.push_back({{}, make_scenario(spec.scenario), {}});
  }
  for (auto& r : runs) policies.push_back(make_policies(spec.policies, r.scenario));

  const auto seeds = spec.seeds();
  const std::size_t per_config = seeds.size() * static_cast<std::size_t>(spec.episodes);
  for (auto& r : runs) r.episodes.resize(per_config);

  struct Job {
    std::size_t config, slot;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < runs.size(); ++c) {
    for (std::size_t s = 0; s < per_config; ++s) jobs.push_back({c, s});
  }
  auto run_job = [&](const Job& j) {
    const auto seed = seeds[j.slot / static_cast<std::size_t>(spec.episodes)];
    const auto index = j.slot % static_cast<std::size_t>(spec.episodes);
    runs[j.config].episodes[j.slot] = run_episode(runs[j.config].scenario, seed, index, policies[j.config]);
  };

  // Static striping keeps every job's result slot fixed, so worker count
  // cannot change the report.
  const int workers = std::max(1, spec.workers);
  if (workers == 1) {
    for (const auto& j : jobs) run_job(j);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < jobs.size(); i += static_cast<std::size_t>(workers)) {
          run_job(jobs[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  ExperimentResult out;
  out.report.key = spec.sweep ? spec.sweep->key : std::string();
  for (auto& r : runs) {
    std::vector<EpisodeSummary> eps;
    int invalid = 0;
    for (const auto& e : r.episodes) {
      if (!e.valid) {
        ++invalid;
        continue;
      }
      eps.push_back({e.trace.header.seed, e.outcome, e.breakdown.total, e.length});
    }
    ConfigMetrics m = aggregate(eps, invalid);
    m.value = r.value;
    out.report.rows.push_back(m);
  }
  out.runs = std::move(runs);
  return out;
}

inline MetricsReport summarize(const ExperimentResult& res) {
  MetricsReport r;
  r.key = res.report.key;
  for (const auto& run : res.runs) {
    std::vector<Trace> traces;
    for (const auto& e : run.episodes) traces.push_back(e.trace);
    r.rows.push_back(summarize(traces, run.value));
  }
  return r;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// report.json, report.csv and, if requested, traces/<config>/<seed>-<episode>.ndjson
inline void write_outputs(const ExperimentSpec& spec, const ExperimentResult& res) {
  if (spec.out_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  write_text(fs::path(spec.out_dir) / "report.json", to_json(res.report).dump(2) + "\n");
  write_text(fs::path(spec.out_dir) / "report.csv", to_csv(res.report));
  if (!spec.write_traces) return;
  for (std::size_t c = 0; c < res.runs.size(); ++c) {
    const auto dir = fs::path(spec.out_dir) / "traces" / std::to_string(c);
    fs::create_directories(dir);
    for (const auto& e : res.runs[c].episodes) {
      const auto name = std::to_string(e.trace.header.seed) + "-" + std::to_string(e.trace.header.episode_index);
      write_text(dir / (name + ".ndjson"), to_ndjson(e.trace, res.runs[c].scenario->network));
    }
  }
}

// ---------------------------------------------------------------------------
// Reference alert-sweep results for trained MAPPO agents (1M steps). Documentation
// only: the scripted baselines here are not expected to match them.

struct AlertSweepReferenceRow {
  double alert_success_prob;
  double outcome_mean;
  double reward_mean;
  double length_mean;
};

inline constexpr std::array<AlertSweepReferenceRow, 7> kAlertSweepReference{{
    {0.0, 0.4963, -4.8858, 49.9803},
    {0.1, 0.4927, -4.0741, 49.7891},
    {0.25, 0.5463, -1.5508, 43.5021},
    {0.5, 0.7913, 0.0672, 22.9676},
    {0.75, 0.9772, 0.845, 5.8354},
    {0.9, 0.9962, 0.9454, 3.9113},
    {1.0, 0.9995, 0.9801, 3.2588},
}};

}  // namespace ipmsrl
