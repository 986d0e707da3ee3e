#pragma once

// Running an experiment plan and writing its outputs:
//   regret.csv     algorithm,topology,regime,delay,t,mean_regret,std_regret
//   trials.csv     algorithm,topology,regime,delay,trial,agent,final_regret
//   manifest.json  resolved configuration, derived quantities, seeds
// Curves are the per-trial max over agents, averaged over trials.

#include <chrono>
#include <cstddef>
#include <ctime>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "doco/config.hpp"
#include "doco/delay.hpp"
#include "doco/simulator.hpp"
#include "doco/topology.hpp"

namespace doco {

inline constexpr const char* kToolVersion = "1.0.0";

struct CellResult {
  TopologyKind topology;
  LossRegime regime;
  DelayParams delay;
  std::vector<ExperimentResult> results;  // one per algorithm, plan order
};

inline std::vector<CellResult> run_plan(const ExperimentPlan& plan, std::size_t threads = default_threads()) {
  std::vector<CellResult> out;
  for (auto& cell : plan.cells())
    out.push_back({cell.topology, cell.regime, cell.delay, compare_algorithms(cell.configs, threads)});
  return out;
}

inline void write_regret_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "algorithm,topology,regime,delay,t,mean_regret,std_regret\n";
  for (const CellResult& c : cells)
    for (const ExperimentResult& r : c.results) {
      const std::string prefix = std::string(to_string(r.config.algorithm)) + ',' + std::string(to_string(c.topology)) +
                                 ',' + std::string(to_string(c.regime)) + ',' + format_delay(c.delay) + ',';
      for (std::size_t i = 0; i < r.mean_curve.size(); ++i)
        out << prefix << i + 1 << ',' << format_number(r.mean_curve[i]) << ',' << format_number(r.std_curve[i])
            << '\n';
    }
}

inline void write_trials_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "algorithm,topology,regime,delay,trial,agent,final_regret\n";
  for (const CellResult& c : cells)
    for (const ExperimentResult& r : c.results) {
      const std::string prefix = std::string(to_string(r.config.algorithm)) + ',' + std::string(to_string(c.topology)) +
                                 ',' + std::string(to_string(c.regime)) + ',' + format_delay(c.delay) + ',';
      for (const TrialSummary& t : r.trials)
        for (std::size_t u = 0; u < t.final_regrets.size(); ++u)
          out << prefix << t.trial << ',' << u + 1 << ',' << format_number(t.final_regrets[u]) << '\n';
    }
}

inline nlohmann::json spectral_json(const CommMatrix& w) {
  const SpectralReport s = spectral_gap_report(w);
  return {{"c", w.c},
          {"sigma2", s.sigma2},
          {"gap", s.gap},
          {"gap_quartic_inverse", s.gap_quartic_inverse},
          {"theta", w.theta},
          {"contraction", w.contraction},
          {"block_length", w.block_length}};
}

inline nlohmann::json invariants_json(const InvariantLog& log) {
  return {{"blocks_checked", log.blocks_checked},
          {"deliveries", log.deliveries},
          {"infeasible_plays", log.infeasible_plays},
          {"count_violations", log.count_violations},
          {"count_inclusive_violations", log.count_inclusive_violations},
          {"count_worst_ratio", log.count_worst_ratio},
          {"sum_violations", log.sum_violations},
          {"sum_worst_ratio", log.sum_worst_ratio}};
}

// Per delay spec and trial: D_total and delta_max of the generated schedule.
inline nlohmann::json delay_stats_json(const ExperimentPlan& plan) {
  nlohmann::json out = nlohmann::json::object();
  for (const DelayParams& d : plan.delays) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t trial = 0; trial < plan.base.trials; ++trial) {
      const DelaySchedule s = generate_schedule(d, plan.base.agents, plan.base.rounds, plan.base.seed, trial);
      const DelayStats st = delay_stats(s, 1);
      rows.push_back({{"trial", trial}, {"d_total", st.d_total}, {"delta_max", st.delta_max}});
    }
    out[format_delay(d)] = std::move(rows);
  }
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json make_manifest(const ExperimentPlan& plan, const std::vector<CellResult>& cells,
                                    const std::string& timestamp = utc_timestamp()) {
  nlohmann::json m;
  m["tool"] = "doco";
  m["version"] = kToolVersion;
  m["timestamp"] = timestamp;
  m["config"] = plan.entries();

  nlohmann::json derived = nlohmann::json::object();
  for (TopologyKind k : plan.topologies) {
    const CommMatrix w = comm_matrix(build_graph(k, plan.base.agents), plan.base.mixing);
    nlohmann::json j = spectral_json(w);
    j["block_length_used"] = plan.base.block_length.value_or(w.block_length);
    derived[std::string(to_string(k))] = std::move(j);
  }
  m["derived"] = {{"topologies", derived}, {"diameter", 2.0 * plan.base.radius}};
  nlohmann::json lip = nlohmann::json::object();
  for (LossRegime r : plan.regimes) {
    SimConfig c = plan.base;
    c.regime = r;
    lip[std::string(to_string(r))] = c.resolved_lipschitz();
  }
  m["derived"]["lipschitz"] = std::move(lip);

  nlohmann::json trials = nlohmann::json::array();
  for (std::size_t t = 0; t < plan.base.trials; ++t) trials.push_back({{"trial", t}, {"seed", plan.base.seed}});
  m["seeds"] = std::move(trials);
  m["delay_stats"] = delay_stats_json(plan);

  nlohmann::json runs = nlohmann::json::array();
  for (const CellResult& c : cells)
    for (const ExperimentResult& r : c.results)
      runs.push_back({{"algorithm", to_string(r.config.algorithm)},
                      {"topology", to_string(c.topology)},
                      {"regime", to_string(c.regime)},
                      {"delay", format_delay(c.delay)},
                      {"block_length", r.block_length},
                      {"final_mean_regret", r.final_mean()},
                      {"final_std_regret", r.std_curve.back()},
                      {"wall_seconds", r.wall_seconds},
                      {"invariants", invariants_json(r.invariants)}});
  m["runs"] = std::move(runs);
  return m;
}

// The configuration stored in a manifest, ready to rerun.
inline ExperimentPlan plan_from_manifest(const nlohmann::json& m) {
  if (!m.contains("config") || !m["config"].is_object()) throw ConfigError("manifest has no 'config' object");
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : m["config"].items()) {
    if (!v.is_string()) throw ConfigError("manifest config value for '" + k + "' is not a string");
    kv[k] = v.get<std::string>();
  }
  return plan_from_entries(kv);
}

}  // namespace doco
