// Command-line front end: run, sweep, replay, serve, train.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ipmsrl.hpp"

using namespace ipmsrl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string scenario;
  std::vector<std::string> policies{"heuristic"};
  int episodes = 100;
  std::uint64_t seed = 0;
  int seeds = 1;
  int workers = 1;
  std::string out;
  bool traces = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
  cmd->add_option("--policy", o.policies,
                  "random | heuristic | wait | tabular:FILE; once for all agents or once per agent");
  cmd->add_option("--episodes", o.episodes, "Episodes per seed");
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--seeds", o.seeds, "Number of seeds (base, base+1, ...)");
  cmd->add_option("--workers", o.workers, "Worker threads");
  cmd->add_option("--out", o.out, "Output directory for report.json / report.csv");
  cmd->add_flag("--traces", o.traces, "Also write one NDJSON trace per episode under OUT/traces");
}

ExperimentSpec make_spec(const CommonOptions& o) {
  ExperimentSpec spec;
  spec.scenario = load_scenario_file(o.scenario);
  spec.policies.clear();
  for (const auto& p : o.policies) spec.policies.push_back(parse_policy_spec(p));
  spec.episodes = o.episodes;
  spec.base_seed = o.seed;
  spec.seed_count = o.seeds;
  spec.workers = o.workers;
  spec.out_dir = o.out;
  spec.write_traces = o.traces;
  return spec;
}

int run_spec(const ExperimentSpec& spec) {
  ExperimentResult res = run_experiment(spec);
  if (summarize(res) != res.report) {
    std::fprintf(stderr, "error: trace-derived metrics disagree with in-run metrics\n");
    return kExitRuntime;
  }
  write_outputs(spec, res);
  std::cout << to_csv(res.report);
  return 0;
}

std::vector<json> parse_values(const std::string& text) {
  std::vector<json> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      out.push_back(json::parse(item));
    } catch (const json::parse_error&) {
      out.push_back(json(item));  // bare words are strings
    }
  }
  return out;
}

int replay_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("trace", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ParsedTrace p;
  try {
    p = parse_trace(ss.str());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("trace", e.what());
  }
  if (!p.trace.footer) {
    std::printf("trace has no footer\n");
    return kExitRuntime;
  }
  const auto& f = *p.trace.footer;
  if (!f.valid) {
    std::printf("trace marked invalid: %s\n", f.error.c_str());
    return kExitRuntime;
  }
  const WorldState w = replay(*p.scenario, p.trace);
  const RewardBreakdown b = breakdown_from_trace(*p.scenario, p.trace);
  const bool world_ok = w.nodes == f.final_nodes && w.outcome == f.outcome && w.t == f.length;
  const bool reward_ok = b == f.breakdown;
  std::printf("outcome %s, length %d, total reward %.9f\n", std::string(to_string(w.outcome)).c_str(), w.t,
              b.total);
  std::printf("final world %s, reward breakdown %s\n", world_ok ? "matches" : "MISMATCH",
              reward_ok ? "matches" : "MISMATCH");
  return world_ok && reward_ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent IPMS cyber-defence simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run episodes and report metrics");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string sweep_key;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Run one configuration per value of a scenario key");
  add_common(sweep, sweep_opts);
  sweep->add_option("--key", sweep_key, "Dotted scenario key, e.g. alert_success_prob")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated JSON values")->required();

  std::string trace_path;
  auto* rep = app.add_subcommand("replay", "Re-reduce a trace and verify its footer");
  rep->add_option("--trace", trace_path, "NDJSON trace file")->required();

  std::string serve_scenario;
  int port = -1;
  std::string host = "127.0.0.1";
  double idle = 300.0;
  int max_sessions = 0;
  auto* serve = app.add_subcommand("serve", "Serve the environment protocol on stdio or TCP");
  serve->add_option("--scenario", serve_scenario, "Scenario JSON file")->required();
  serve->add_option("--tcp", port, "Listen on this TCP port instead of stdio (0 picks one)");
  serve->add_option("--host", host, "TCP listen address");
  serve->add_option("--idle-timeout", idle, "Seconds of silence before a session is closed");
  serve->add_option("--max-sessions", max_sessions, "Exit after this many TCP sessions (0: unlimited)");

  std::string train_scenario;
  std::string table_out;
  TrainingConfig tcfg;
  auto* train = app.add_subcommand("train", "Train the tabular Q-learner");
  train->add_option("--scenario", train_scenario, "Scenario JSON file")->required();
  train->add_option("--episodes", tcfg.episodes, "Training episodes");
  train->add_option("--seed", tcfg.seed, "Training seed");
  train->add_option("--out", table_out, "Where to write the table JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_spec(make_spec(run_opts));
    if (*sweep) {
      ExperimentSpec spec = make_spec(sweep_opts);
      spec.sweep = SweepSpec{sweep_key, parse_values(sweep_values)};
      return run_spec(spec);
    }
    if (*rep) return replay_file(trace_path);
    if (*serve) {
      auto sc = make_scenario(load_scenario_file(serve_scenario));
      ServeOptions opts;
      opts.idle_timeout = std::chrono::milliseconds(static_cast<long long>(idle * 1000));
      if (port < 0) {
        serve_stdio(sc, opts);
      } else {
        serve_tcp(sc, host, port, opts, max_sessions,
                  [](int p) { std::fprintf(stderr, "listening on port %d\n", p); });
      }
      return 0;
    }
    if (*train) {
      auto sc = make_scenario(load_scenario_file(train_scenario));
      TabularQ q = train_tabular_q(sc, tcfg);
      std::ofstream out(table_out);
      if (!out) throw std::runtime_error("cannot write " + table_out);
      out << q.to_json().dump() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
