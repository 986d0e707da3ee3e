#pragma once

// Feedback delay schedules and the observed/missing bookkeeping derived from
// them.
//
// Rounds are 1-based (t = 1..T) to match the protocol: the gradient of round t
// for agent u arrives at the end of round t + d_t(u). Agents are 0-based.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "doco/errors.hpp"
#include "doco/rng.hpp"

namespace doco {

enum class DelayKind { uniform, geometric, constant, custom };

inline std::string_view to_string(DelayKind kind) {
  switch (kind) {
    case DelayKind::uniform: return "uniform";
    case DelayKind::geometric: return "geometric";
    case DelayKind::constant: return "constant";
    case DelayKind::custom: return "custom";
  }
  return "custom";
}

struct DelayParams {
  DelayKind kind = DelayKind::constant;
  std::size_t max_delay = 0;       // uniform: draws from {0..max_delay}
  double success_probability = 1;  // geometric
  std::size_t constant = 0;        // constant
  // Geometric support starts at this value: 0 gives {0,1,...}, 1 gives {1,2,...}.
  std::size_t geometric_offset = 0;
};

class DelaySchedule {
 public:
  DelaySchedule() = default;

  // `delays[(t-1)*agents + u]`; entries are truncated so t + d <= T.
  DelaySchedule(std::size_t rounds, std::size_t agents, std::vector<std::size_t> delays,
                DelayKind kind = DelayKind::custom, std::uint64_t seed = 0)
      : rounds_(rounds), agents_(agents), delays_(std::move(delays)), kind_(kind), seed_(seed) {
    if (rounds == 0 || agents == 0) throw ConfigError("delay schedule needs T >= 1 and N >= 1");
    if (delays_.size() != rounds * agents) throw ConfigError("delay schedule has wrong size");
    for (std::size_t t = 1; t <= rounds_; ++t)
      for (std::size_t u = 0; u < agents_; ++u) {
        std::size_t& d = delays_[(t - 1) * agents_ + u];
        d = std::min(d, rounds_ - t);
      }
  }

  std::size_t rounds() const { return rounds_; }
  std::size_t agents() const { return agents_; }
  DelayKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t delay(std::size_t t, std::size_t u) const { return delays_[(t - 1) * agents_ + u]; }
  std::size_t arrival_round(std::size_t t, std::size_t u) const { return t + delay(t, u); }

  const std::vector<std::size_t>& raw() const { return delays_; }
  bool operator==(const DelaySchedule&) const = default;

 private:
  std::size_t rounds_ = 0;
  std::size_t agents_ = 0;
  std::vector<std::size_t> delays_;
  DelayKind kind_ = DelayKind::custom;
  std::uint64_t seed_ = 0;
};

inline void validate(const DelayParams& p) {
  if (p.kind == DelayKind::geometric && !(p.success_probability > 0.0 && p.success_probability <= 1.0))
    throw ConfigError("geometric delay needs p in (0,1], got " + std::to_string(p.success_probability));
  if (p.kind == DelayKind::custom) throw ConfigError("custom delays are loaded from CSV");
}

// I.i.d. draws per (t, u) keyed by (seed, trial, t, u), then truncated.
inline DelaySchedule generate_schedule(const DelayParams& p, std::size_t agents, std::size_t rounds,
                                       std::uint64_t seed, std::uint64_t trial = 0) {
  validate(p);
  if (rounds == 0 || agents == 0) throw ConfigError("delay schedule needs T >= 1 and N >= 1");
  const CounterRng rng(seed, Stream::delay, trial);
  std::vector<std::size_t> d(rounds * agents);
  for (std::size_t t = 1; t <= rounds; ++t)
    for (std::size_t u = 0; u < agents; ++u) {
      std::size_t value = 0;
      switch (p.kind) {
        case DelayKind::uniform: value = rng.uniform_int(p.max_delay, t, u); break;
        case DelayKind::geometric:
          value = rng.geometric(p.success_probability, t, u) + p.geometric_offset;
          break;
        case DelayKind::constant: value = p.constant; break;
        case DelayKind::custom: break;
      }
      d[(t - 1) * agents + u] = value;
    }
  return DelaySchedule(rounds, agents, std::move(d), p.kind, seed);
}

// Per-agent count of gradients still missing at the start of each round:
// missing(t, u) = |m_t(u)| = #{tau < t : tau + d_tau(u) >= t}, for
// t = 1..T+1. Row T+1 is the count after the horizon and is always 0.
class MissingTable {
 public:
  explicit MissingTable(const DelaySchedule& s) : rounds_(s.rounds()), agents_(s.agents()) {
    // arrivals[a][u]: number of items arriving at the end of round a.
    std::vector<std::size_t> arrivals((rounds_ + 2) * agents_, 0);
    for (std::size_t t = 1; t <= rounds_; ++t)
      for (std::size_t u = 0; u < agents_; ++u) ++arrivals[s.arrival_round(t, u) * agents_ + u];
    counts_.assign((rounds_ + 2) * agents_, 0);
    for (std::size_t u = 0; u < agents_; ++u) {
      std::size_t observed = 0;  // |o_t(u)| = arrivals at rounds < t
      for (std::size_t t = 1; t <= rounds_ + 1; ++t) {
        if (t >= 2) observed += arrivals[(t - 1) * agents_ + u];
        counts_[t * agents_ + u] = (t - 1) - observed;
      }
    }
  }

  std::size_t rounds() const { return rounds_; }
  std::size_t agents() const { return agents_; }
  std::size_t missing(std::size_t t, std::size_t u) const { return counts_[t * agents_ + u]; }
  std::size_t observed(std::size_t t, std::size_t u) const { return (t - 1) - missing(t, u); }

 private:
  std::size_t rounds_;
  std::size_t agents_;
  std::vector<std::size_t> counts_;
};

inline MissingTable missing_counts(const DelaySchedule& s) { return MissingTable(s); }

struct DelayStats {
  double delta_max = 0.0;  // max_t (1/N) sum_u |m_t(u)|
  double d_total = 0.0;    // (1/N) sum_t sum_u d_t(u)
  std::size_t block_length = 1;
  // block_missing[s-1][u] = q_s(u) = |m_{sB+1}(u)|; the last, possibly
  // partial, block is evaluated at min(sB, T) + 1.
  std::vector<std::vector<std::size_t>> block_missing;
  std::vector<double> block_mean_missing;        // M_s = (1/N) sum_u q_s(u)
  std::vector<double> cumulative_mean_missing;   // sum_{l<=s} M_l
};

inline std::size_t block_count(std::size_t rounds, std::size_t block_length) {
  return (rounds + block_length - 1) / block_length;
}

inline DelayStats delay_stats(const DelaySchedule& s, std::size_t block_length) {
  if (block_length == 0) throw ConfigError("block length must be positive");
  const MissingTable m(s);
  const std::size_t n = s.agents();
  const double inv_n = 1.0 / static_cast<double>(n);
  DelayStats out;
  out.block_length = block_length;
  for (std::size_t t = 1; t <= s.rounds(); ++t) {
    std::size_t sum = 0;
    for (std::size_t u = 0; u < n; ++u) {
      sum += m.missing(t, u);
      out.d_total += static_cast<double>(s.delay(t, u));
    }
    out.delta_max = std::max(out.delta_max, static_cast<double>(sum) * inv_n);
  }
  out.d_total *= inv_n;
  const std::size_t blocks = block_count(s.rounds(), block_length);
  double cumulative = 0.0;
  for (std::size_t b = 1; b <= blocks; ++b) {
    const std::size_t boundary = std::min(b * block_length, s.rounds()) + 1;
    std::vector<std::size_t> q(n);
    std::size_t sum = 0;
    for (std::size_t u = 0; u < n; ++u) {
      q[u] = m.missing(boundary, u);
      sum += q[u];
    }
    const double mean = static_cast<double>(sum) * inv_n;
    cumulative += mean;
    out.block_missing.push_back(std::move(q));
    out.block_mean_missing.push_back(mean);
    out.cumulative_mean_missing.push_back(cumulative);
  }
  return out;
}

struct Arrival {
  std::size_t agent;
  std::size_t origin_round;
  bool operator==(const Arrival&) const = default;
};

// Items whose feedback arrives at the end of round t: tau + d_tau(u) = t.
// Simulator-side bookkeeping only; learners never see origin rounds.
inline std::vector<Arrival> feedback_arrivals(const DelaySchedule& s, std::size_t t) {
  std::vector<Arrival> out;
  for (std::size_t u = 0; u < s.agents(); ++u)
    for (std::size_t tau = 1; tau <= t; ++tau)
      if (s.arrival_round(tau, u) == t) out.push_back({u, tau});
  return out;
}

// Arrivals for every round at once: index [t] lists the items of round t.
inline std::vector<std::vector<Arrival>> arrival_calendar(const DelaySchedule& s) {
  std::vector<std::vector<Arrival>> out(s.rounds() + 1);
  for (std::size_t tau = 1; tau <= s.rounds(); ++tau)
    for (std::size_t u = 0; u < s.agents(); ++u) out[s.arrival_round(tau, u)].push_back({u, tau});
  return out;
}

// CSV with header `t,agent,delay`, one row per (t, agent), both 1-based.
inline DelaySchedule load_schedule_csv(std::istream& in, std::size_t agents, std::size_t rounds) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("delay CSV is empty");
  if (line != "t,agent,delay") throw ConfigError("delay CSV header must be 't,agent,delay'");
  std::vector<std::size_t> d(rounds * agents, 0);
  std::vector<bool> seen(rounds * agents, false);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    long long t = 0;
    long long u = 0;
    long long delay = 0;
    char c1 = 0;
    char c2 = 0;
    if (!(fields >> t >> c1 >> u >> c2 >> delay) || c1 != ',' || c2 != ',')
      throw ConfigError("delay CSV: malformed row " + std::to_string(row));
    if (t < 1 || static_cast<std::size_t>(t) > rounds || u < 1 || static_cast<std::size_t>(u) > agents)
      throw ConfigError("delay CSV: (t, agent) out of range on row " + std::to_string(row));
    if (delay < 0) throw ConfigError("delay CSV: negative delay on row " + std::to_string(row));
    const std::size_t idx = static_cast<std::size_t>(t - 1) * agents + static_cast<std::size_t>(u - 1);
    if (seen[idx]) throw ConfigError("delay CSV: duplicate (t, agent) on row " + std::to_string(row));
    seen[idx] = true;
    d[idx] = static_cast<std::size_t>(delay);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ConfigError("delay CSV: missing (t, agent) rows");
  return DelaySchedule(rounds, agents, std::move(d), DelayKind::custom, 0);
}

inline std::string to_csv(const DelaySchedule& s) {
  std::ostringstream out;
  out << "t,agent,delay\n";
  for (std::size_t t = 1; t <= s.rounds(); ++t)
    for (std::size_t u = 0; u < s.agents(); ++u) out << t << ',' << u + 1 << ',' << s.delay(t, u) << '\n';
  return out.str();
}

}  // namespace doco
