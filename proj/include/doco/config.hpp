#pragma once

// Flat key-value experiment configuration.
//
//   # comment
//   topologies = complete, grid, cycle
//   agents     = 36
//   algorithms = adftrl_adaptive, adftrl_sc, baseline_dogd
//   regimes    = convex, strongly_convex
//   delays     = uniform:50, geometric:0.1
//   rounds     = 1000
//   trials     = 20
//   seed       = 1
//
// Optional keys: mixing, dimension, radius, lipschitz, alpha,
// known_total_delay, block_length. Delay specs are uniform:<max>,
// geometric:<p>[:<offset>] or constant:<d>. The experiment is the cross product
// delays x regimes x topologies; adftrl_sc only runs in strongly_convex cells.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "doco/algorithms.hpp"
#include "doco/delay.hpp"
#include "doco/errors.hpp"
#include "doco/losses.hpp"
#include "doco/simulator.hpp"
#include "doco/topology.hpp"

namespace doco {

// Shortest round-trip decimal form; locale independent.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_delay(const DelayParams& p) {
  switch (p.kind) {
    case DelayKind::uniform: return "uniform:" + std::to_string(p.max_delay);
    case DelayKind::geometric: {
      std::string s = "geometric:" + format_number(p.success_probability);
      if (p.geometric_offset != 0) s += ":" + std::to_string(p.geometric_offset);
      return s;
    }
    case DelayKind::constant: return "constant:" + std::to_string(p.constant);
    case DelayKind::custom: break;
  }
  return "custom";
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("key '" + std::string(key) + "': cannot parse '" + text + "' as a number");
  return value;
}

inline bool parse_bool(std::string_view key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false, got '" + text + "'");
}

}  // namespace detail

inline DelayParams parse_delay(const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  DelayParams p;
  const std::string& kind = parts[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() < lo || parts.size() > hi) throw ConfigError("malformed delay spec '" + spec + "'");
  };
  if (kind == "uniform") {
    need(2, 2);
    p.kind = DelayKind::uniform;
    p.max_delay = detail::parse_number<std::size_t>("delays", parts[1]);
  } else if (kind == "geometric") {
    need(2, 3);
    p.kind = DelayKind::geometric;
    p.success_probability = detail::parse_number<double>("delays", parts[1]);
    if (parts.size() == 3) p.geometric_offset = detail::parse_number<std::size_t>("delays", parts[2]);
  } else if (kind == "constant") {
    need(2, 2);
    p.kind = DelayKind::constant;
    p.constant = detail::parse_number<std::size_t>("delays", parts[1]);
  } else {
    throw ConfigError("unknown delay kind '" + kind + "'");
  }
  validate(p);
  return p;
}

// A grid of experiments sharing everything but topology, regime and delay.
struct ExperimentPlan {
  std::vector<TopologyKind> topologies;
  std::vector<Algorithm> algorithms;
  std::vector<LossRegime> regimes;
  std::vector<DelayParams> delays;
  SimConfig base;  // topology, algorithm, regime and delay are overwritten per cell

  struct Cell {
    TopologyKind topology;
    LossRegime regime;
    DelayParams delay;
    std::vector<SimConfig> configs;  // one per applicable algorithm
  };

  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (const DelayParams& d : delays)
      for (LossRegime r : regimes)
        for (TopologyKind topo : topologies) {
          Cell c{topo, r, d, {}};
          for (Algorithm a : algorithms) {
            if (a == Algorithm::adftrl_sc && r != LossRegime::strongly_convex) continue;
            SimConfig cfg = base;
            cfg.topology = topo;
            cfg.regime = r;
            cfg.delay = d;
            cfg.algorithm = a;
            cfg.validate();
            c.configs.push_back(cfg);
          }
          if (!c.configs.empty()) out.push_back(std::move(c));
        }
    return out;
  }

  // Canonical key-value text; parse_config(to_config_text(p)) == p.
  std::map<std::string, std::string> entries() const {
    auto join = [](const auto& items, auto&& fmt) {
      std::string s;
      for (const auto& it : items) {
        if (!s.empty()) s += ", ";
        s += fmt(it);
      }
      return s;
    };
    std::map<std::string, std::string> kv;
    kv["topologies"] = join(topologies, [](TopologyKind k) { return std::string(to_string(k)); });
    kv["algorithms"] = join(algorithms, [](Algorithm a) { return std::string(to_string(a)); });
    kv["regimes"] = join(regimes, [](LossRegime r) { return std::string(to_string(r)); });
    kv["delays"] = join(delays, [](const DelayParams& d) { return format_delay(d); });
    kv["agents"] = std::to_string(base.agents);
    if (base.mixing) kv["mixing"] = format_number(*base.mixing);
    kv["dimension"] = std::to_string(base.dimension);
    kv["radius"] = format_number(base.radius);
    if (base.lipschitz) kv["lipschitz"] = format_number(*base.lipschitz);
    kv["alpha"] = format_number(base.alpha);
    kv["rounds"] = std::to_string(base.rounds);
    kv["trials"] = std::to_string(base.trials);
    kv["seed"] = std::to_string(base.seed);
    kv["known_total_delay"] = base.known_total_delay ? "true" : "false";
    if (base.block_length) kv["block_length"] = std::to_string(*base.block_length);
    return kv;
  }
};

inline const std::vector<std::string>& required_config_keys() {
  static const std::vector<std::string> keys = {"topologies", "agents", "algorithms", "regimes",
                                                "delays",     "rounds", "trials",     "seed"};
  return keys;
}

inline ExperimentPlan plan_from_entries(const std::map<std::string, std::string>& kv) {
  static const std::set<std::string> optional_keys = {"mixing",    "dimension",         "radius",      "lipschitz",
                                                      "alpha",     "known_total_delay", "block_length"};
  for (const std::string& k : required_config_keys())
    if (!kv.count(k)) throw ConfigError("missing required key '" + k + "'");
  for (const auto& [k, v] : kv)
    if (!optional_keys.count(k) &&
        std::find(required_config_keys().begin(), required_config_keys().end(), k) == required_config_keys().end())
      throw ConfigError("unknown key '" + k + "'");

  auto list = [&](const std::string& key) {
    auto items = detail::split(kv.at(key), ',');
    if (items.size() == 1 && items[0].empty()) throw ConfigError("key '" + key + "' is empty");
    return items;
  };

  ExperimentPlan p;
  for (const auto& s : list("topologies")) p.topologies.push_back(parse_topology(s));
  for (const auto& s : list("algorithms")) p.algorithms.push_back(parse_algorithm(s));
  for (const auto& s : list("regimes")) p.regimes.push_back(parse_regime(s));
  for (const auto& s : list("delays")) p.delays.push_back(parse_delay(s));

  SimConfig& b = p.base;
  b.agents = detail::parse_number<std::size_t>("agents", kv.at("agents"));
  b.rounds = detail::parse_number<std::size_t>("rounds", kv.at("rounds"));
  b.trials = detail::parse_number<std::size_t>("trials", kv.at("trials"));
  b.seed = detail::parse_number<std::uint64_t>("seed", kv.at("seed"));
  if (auto it = kv.find("mixing"); it != kv.end()) b.mixing = detail::parse_number<double>("mixing", it->second);
  if (auto it = kv.find("dimension"); it != kv.end())
    b.dimension = detail::parse_number<std::size_t>("dimension", it->second);
  if (auto it = kv.find("radius"); it != kv.end()) b.radius = detail::parse_number<double>("radius", it->second);
  if (auto it = kv.find("lipschitz"); it != kv.end())
    b.lipschitz = detail::parse_number<double>("lipschitz", it->second);
  if (auto it = kv.find("alpha"); it != kv.end()) b.alpha = detail::parse_number<double>("alpha", it->second);
  if (auto it = kv.find("known_total_delay"); it != kv.end())
    b.known_total_delay = detail::parse_bool("known_total_delay", it->second);
  if (auto it = kv.find("block_length"); it != kv.end())
    b.block_length = detail::parse_number<std::size_t>("block_length", it->second);

  if (p.cells().empty()) throw ConfigError("configuration selects no runnable experiment");
  return p;
}

inline ExperimentPlan parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }
  return plan_from_entries(kv);
}

inline ExperimentPlan parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline std::string to_config_text(const ExperimentPlan& p) {
  std::string out;
  for (const auto& [k, v] : p.entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace doco
