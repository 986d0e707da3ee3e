// doco: run experiment grids, print spectral data, plot regret curves.
//
//   doco run <config|manifest.json> -o <dir> [--threads k]
//   doco spectral <complete|grid|cycle> <N> [--c x]
//   doco plot <regret.csv> -o <file.svg>
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "doco/doco.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw doco::ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw doco::ConfigError("cannot write '" + path.string() + "'");
}

// A manifest is recognised by its JSON object syntax.
doco::ExperimentPlan load_plan(const std::string& path) {
  const std::string text = slurp(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw doco::ConfigError("manifest '" + path + "': " + e.what());
    }
    return doco::plan_from_manifest(m);
  }
  return doco::parse_config(text);
}

int cmd_run(const std::string& config, const std::string& out_dir, std::size_t threads) {
  const doco::ExperimentPlan plan = load_plan(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw doco::ConfigError("cannot create '" + out_dir + "': " + ec.message());

  const auto cells = doco::run_plan(plan, threads);
  std::ostringstream regret, trials;
  doco::write_regret_csv(regret, cells);
  doco::write_trials_csv(trials, cells);
  write_file(fs::path(out_dir) / "regret.csv", regret.str());
  write_file(fs::path(out_dir) / "trials.csv", trials.str());
  write_file(fs::path(out_dir) / "manifest.json", doco::make_manifest(plan, cells).dump(2) + "\n");

  for (const auto& c : cells)
    for (const auto& r : c.results)
      std::printf("%-16s %-9s %-16s %-14s B=%-4zu Reg_T=%.2f +- %.2f\n", std::string(doco::to_string(r.config.algorithm)).c_str(),
                  std::string(doco::to_string(c.topology)).c_str(), std::string(doco::to_string(c.regime)).c_str(),
                  doco::format_delay(c.delay).c_str(), r.block_length, r.final_mean(), r.std_curve.back());
  return 0;
}

int cmd_spectral(const std::string& topology, std::size_t n, std::optional<double> c) {
  const doco::Graph g = doco::build_graph(doco::parse_topology(topology), n);
  const doco::CommMatrix w = doco::comm_matrix(g, c);
  const doco::SpectralReport s = doco::spectral_gap_report(w);
  std::printf("topology             %s\n", topology.c_str());
  std::printf("N                    %zu\n", n);
  std::printf("c                    %.12g\n", w.c);
  std::printf("sigma2               %.12f\n", s.sigma2);
  std::printf("gap                  %.12f\n", s.gap);
  std::printf("gap^(-1/4)           %.6f\n", s.gap_quartic_inverse);
  std::printf("theta                %.12f\n", w.theta);
  std::printf("B                    %zu\n", w.block_length);
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& out) {
  std::ifstream in(csv);
  if (!in) throw doco::ConfigError("cannot read '" + csv + "'");
  const doco::RegretTable tab = doco::read_regret_csv(in);
  for (const auto& [path, svg] : doco::render_figures(tab, out)) {
    write_file(path, svg);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized online convex optimization with delayed feedback"};
  app.require_subcommand(1);

  std::string config, out_dir;
  std::size_t threads = doco::default_threads();
  auto* run = app.add_subcommand("run", "run an experiment grid from a config or manifest");
  run->add_option("config", config, "key-value config or manifest.json")->required();
  run->add_option("-o,--out", out_dir, "output directory")->required();
  run->add_option("--threads", threads, "worker threads for trials")->check(CLI::PositiveNumber);

  std::string topology;
  std::size_t nodes = 0;
  std::optional<double> mixing;
  auto* spectral = app.add_subcommand("spectral", "print spectral data of a gossip matrix");
  spectral->add_option("topology", topology, "complete, grid or cycle")->required();
  spectral->add_option("N", nodes, "number of nodes")->required();
  spectral->add_option("--c", mixing, "Laplacian step c (default 1/N)");

  std::string csv, plot_out;
  auto* plot = app.add_subcommand("plot", "render regret.csv as SVG");
  plot->add_option("csv", csv, "regret.csv")->required();
  plot->add_option("-o,--out", plot_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out_dir, threads);
    if (*spectral) return cmd_spectral(topology, nodes, mixing);
    if (*plot) return cmd_plot(csv, plot_out);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericError;
  }
  return 0;
}
