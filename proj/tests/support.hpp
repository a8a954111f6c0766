#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ipmsrl.hpp"

namespace testing_support {

using namespace ipmsrl;

inline std::string source_path(const std::string& rel) { return std::string(IPMSRL_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig default_config() { return load_scenario_file(source_path("scenarios/default.json")); }
inline ScenarioConfig micro_config() { return load_scenario_file(source_path("scenarios/micro.json")); }

inline std::shared_ptr<const Scenario> default_scenario() { return make_scenario(default_config()); }

// hmi-1 - hmi-2 - ... - plc-1 - cwp-1 as a plain chain, no switches.
inline json chain_doc(int hmis) {
  json nodes = json::array();
  json links = json::array();
  for (int i = 1; i <= hmis; ++i) {
    nodes.push_back({{"id", "hmi-" + std::to_string(i)}, {"kind", "HMI"}});
    if (i > 1) links.push_back({"hmi-" + std::to_string(i - 1), "hmi-" + std::to_string(i)});
  }
  nodes.push_back({{"id", "plc-1"}, {"kind", "PLC"}});
  nodes.push_back({{"id", "cwp-1"}, {"kind", "CWP"}});
  links.push_back({"hmi-" + std::to_string(hmis), "plc-1"});
  links.push_back({"plc-1", "cwp-1"});
  return {{"topology", {{"nodes", nodes}, {"links", links}}}, {"num_defenders", 1}};
}

inline std::shared_ptr<const Scenario> scenario_from(const json& doc) { return make_scenario(load_scenario(doc.dump())); }

inline NodeIdx idx(const Scenario& sc, const std::string& id) { return *sc.network.find(id); }

inline Policy heuristic() {
  return [](const PolicyInput& in) { return heuristic_policy(in); };
}

// Drives an episode with a fixed per-step script; steps past the end wait.
inline Episode run_script(std::shared_ptr<const Scenario> sc, std::uint64_t seed,
                          const std::vector<std::vector<DefenderAction>>& script) {
  Episode ep(sc, seed, 0);
  std::size_t k = 0;
  while (!ep.terminal()) {
    std::vector<DefenderAction> joint(static_cast<std::size_t>(ep.num_agents()));
    if (k < script.size()) joint = script[k];
    ++k;
    ep.step(joint);
  }
  return ep;
}

}  // namespace testing_support
