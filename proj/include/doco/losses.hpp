#pragma once

// Decision domains, per-agent loss streams, gradient oracles, the offline
// comparator and regret accounting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "doco/errors.hpp"
#include "doco/linalg.hpp"
#include "doco/rng.hpp"

namespace doco {

// Closed convex set containing the origin: a Euclidean ball or a box.
class Domain {
 public:
  enum class Shape { ball, box };

  static Domain ball(std::size_t dimension, double radius) {
    if (dimension == 0) throw ConfigError("domain dimension must be positive");
    if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
    Domain d;
    d.shape_ = Shape::ball;
    d.dimension_ = dimension;
    d.radius_ = radius;
    return d;
  }

  static Domain box(Vector lo, Vector hi) {
    if (lo.empty() || lo.size() != hi.size()) throw ConfigError("box bounds must be non-empty and equal length");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= 0.0 && 0.0 <= hi[i])) throw ConfigError("box must contain the origin");
    Domain d;
    d.shape_ = Shape::box;
    d.dimension_ = lo.size();
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
  }

  Shape shape() const { return shape_; }
  std::size_t dimension() const { return dimension_; }
  double radius() const { return radius_; }
  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }

  double diameter() const {
    if (shape_ == Shape::ball) return 2.0 * radius_;
    double acc = 0.0;
    for (std::size_t i = 0; i < dimension_; ++i) acc += (hi_[i] - lo_[i]) * (hi_[i] - lo_[i]);
    return std::sqrt(acc);
  }

  // Euclidean projection.
  Vector project(std::span<const double> x) const {
    Vector out(x.begin(), x.end());
    if (shape_ == Shape::ball) {
      const double r = norm(out);
      if (r > radius_) {
        const double s = radius_ / r;
        for (double& v : out) v *= s;
      }
    } else {
      for (std::size_t i = 0; i < dimension_; ++i) out[i] = std::clamp(out[i], lo_[i], hi_[i]);
    }
    return out;
  }

  bool contains(std::span<const double> x, double tolerance = 1e-12) const {
    if (shape_ == Shape::ball) return norm(x) <= radius_ * (1.0 + tolerance);
    for (std::size_t i = 0; i < dimension_; ++i)
      if (x[i] < lo_[i] - tolerance || x[i] > hi_[i] + tolerance) return false;
    return true;
  }

  // argmin over the domain of <g, x>; the origin when g = 0.
  Vector linear_minimizer(std::span<const double> g) const {
    Vector out(dimension_, 0.0);
    if (shape_ == Shape::ball) {
      const double gn = norm(g);
      if (gn == 0.0) return out;
      for (std::size_t i = 0; i < dimension_; ++i) out[i] = -radius_ * g[i] / gn;
    } else {
      for (std::size_t i = 0; i < dimension_; ++i)
        out[i] = g[i] > 0.0 ? lo_[i] : (g[i] < 0.0 ? hi_[i] : 0.0);
    }
    return out;
  }

 private:
  Shape shape_ = Shape::ball;
  std::size_t dimension_ = 1;
  double radius_ = 1.0;
  Vector lo_;
  Vector hi_;
};

inline Vector project(const Domain& dom, std::span<const double> x) { return dom.project(x); }

enum class LossRegime { convex, strongly_convex };

inline std::string_view to_string(LossRegime r) {
  return r == LossRegime::convex ? "convex" : "strongly_convex";
}

inline LossRegime parse_regime(std::string_view name) {
  if (name == "convex") return LossRegime::convex;
  if (name == "strongly_convex") return LossRegime::strongly_convex;
  throw ConfigError("unknown loss regime '" + std::string(name) + "'");
}

// Per (t, v) losses of one of two forms:
//   quadratic: f = 1/2 (<w, x> - y)^2 + (alpha/2) ||x||^2
//   linear:    f = <w, x>
// Rounds are 1-based, agents 0-based.
class LossStream {
 public:
  enum class Form { quadratic, linear };

  LossStream() = default;
  LossStream(std::size_t agents, std::size_t rounds, std::size_t dimension, Form form, double alpha)
      : agents_(agents),
        rounds_(rounds),
        dimension_(dimension),
        form_(form),
        alpha_(alpha),
        features_(agents * rounds * dimension, 0.0),
        labels_(agents * rounds, 0.0) {
    if (agents == 0 || rounds == 0 || dimension == 0) throw ConfigError("loss stream needs N, T, n >= 1");
    if (alpha < 0.0) throw ConfigError("regularization weight must be non-negative");
  }

  std::size_t agents() const { return agents_; }
  std::size_t rounds() const { return rounds_; }
  std::size_t dimension() const { return dimension_; }
  Form form() const { return form_; }
  double alpha() const { return alpha_; }
  bool regularized() const { return alpha_ > 0.0; }

  std::span<double> feature(std::size_t t, std::size_t v) {
    return {features_.data() + index(t, v) * dimension_, dimension_};
  }
  std::span<const double> feature(std::size_t t, std::size_t v) const {
    return {features_.data() + index(t, v) * dimension_, dimension_};
  }
  double& label(std::size_t t, std::size_t v) { return labels_[index(t, v)]; }
  double label(std::size_t t, std::size_t v) const { return labels_[index(t, v)]; }

  double value(std::size_t t, std::size_t v, std::span<const double> x) const {
    const auto w = feature(t, v);
    if (form_ == Form::linear) return dot(w, x);
    const double r = dot(w, x) - label(t, v);
    return 0.5 * r * r + 0.5 * alpha_ * dot(x, x);
  }

  // Global loss sum_v f_t(v, x).
  double global_value(std::size_t t, std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t v = 0; v < agents_; ++v) acc += value(t, v, x);
    return acc;
  }

  void gradient(std::size_t t, std::size_t v, std::span<const double> x, std::span<double> out) const {
    const auto w = feature(t, v);
    if (form_ == Form::linear) {
      std::copy(w.begin(), w.end(), out.begin());
      return;
    }
    const double r = dot(w, x) - label(t, v);
    for (std::size_t i = 0; i < dimension_; ++i) out[i] = r * w[i] + alpha_ * x[i];
  }

  Vector gradient(std::size_t t, std::size_t v, std::span<const double> x) const {
    Vector g(dimension_);
    gradient(t, v, x, g);
    return g;
  }

  bool operator==(const LossStream&) const = default;

 private:
  std::size_t index(std::size_t t, std::size_t v) const { return (t - 1) * agents_ + v; }

  std::size_t agents_ = 0;
  std::size_t rounds_ = 0;
  std::size_t dimension_ = 0;
  Form form_ = Form::quadratic;
  double alpha_ = 0.0;
  std::vector<double> features_;
  std::vector<double> labels_;
};

inline Vector grad(const LossStream& s, std::size_t t, std::size_t v, std::span<const double> x) {
  return s.gradient(t, v, x);
}

// Synthetic regression stream: features uniform on [-1,1]^n; the first N/2
// agents see pure noise labels, the rest see <w, 1> + noise; noise is a
// standard normal hard-clipped to [-1, 1]. The strongly convex regime adds
// (alpha/2)||x||^2.
inline LossStream generate_stream(std::size_t agents, std::size_t rounds, std::size_t dimension,
                                  std::uint64_t seed, LossRegime regime, double alpha = 1.0,
                                  std::uint64_t trial = 0) {
  if (agents % 2 != 0) throw ConfigError("loss stream needs an even number of agents, got " + std::to_string(agents));
  if (regime == LossRegime::strongly_convex && !(alpha > 0.0))
    throw ConfigError("strongly convex regime needs alpha > 0");
  LossStream s(agents, rounds, dimension, LossStream::Form::quadratic,
               regime == LossRegime::strongly_convex ? alpha : 0.0);
  const CounterRng features(seed, Stream::feature, trial);
  const CounterRng noise(seed, Stream::noise, trial);
  for (std::size_t t = 1; t <= rounds; ++t)
    for (std::size_t v = 0; v < agents; ++v) {
      auto w = s.feature(t, v);
      double ones = 0.0;
      for (std::size_t i = 0; i < dimension; ++i) {
        w[i] = features.uniform(-1.0, 1.0, t, v, i);
        ones += w[i];
      }
      const double eps = std::clamp(noise.normal(t, v), -1.0, 1.0);
      s.label(t, v) = v < agents / 2 ? eps : ones + eps;
    }
  return s;
}

// Worst-case gradient norm of the synthetic stream over a ball of radius R:
// |<w,x> - y| <= sqrt(n) R + (n + 1), ||w|| <= sqrt(n), plus alpha R when
// regularized.
inline double default_lipschitz(std::size_t dimension, double radius, double alpha) {
  const double n = static_cast<double>(dimension);
  const double y_max = n + 1.0;
  return (std::sqrt(n) * radius + y_max) * std::sqrt(n) + alpha * radius;
}

// F(x) = sum_t sum_v f_t(v, x) = 1/2 x^T A x - b^T x + const.
struct QuadraticTotal {
  Matrix hessian;
  Vector linear;  // b
};

inline QuadraticTotal total_loss(const LossStream& s) {
  const std::size_t n = s.dimension();
  QuadraticTotal q{Matrix(n, n), Vector(n, 0.0)};
  for (std::size_t t = 1; t <= s.rounds(); ++t)
    for (std::size_t v = 0; v < s.agents(); ++v) {
      const auto w = s.feature(t, v);
      if (s.form() == LossStream::Form::linear) {
        axpy(-1.0, w, q.linear);
        continue;
      }
      const double y = s.label(t, v);
      for (std::size_t i = 0; i < n; ++i) {
        q.linear[i] += y * w[i];
        for (std::size_t j = 0; j < n; ++j) q.hessian(i, j) += w[i] * w[j];
      }
    }
  if (s.form() == LossStream::Form::quadratic && s.alpha() > 0.0) {
    const double reg = s.alpha() * static_cast<double>(s.rounds() * s.agents());
    for (std::size_t i = 0; i < n; ++i) q.hessian(i, i) += reg;
  }
  return q;
}

struct OfflineOptimum {
  Vector x_star;
  std::size_t iterations = 0;
  double stationarity = 0.0;  // ||x - P(x - grad F(x) / lambda_max)||
};

// Best fixed decision in hindsight by projected gradient descent with step
// 1/lambda_max(A). Throws NumericError if stationarity 1e-10 is not reached
// within the iteration cap.
inline OfflineOptimum offline_optimum(const LossStream& s, const Domain& dom,
                                      std::size_t max_iterations = 100000, double tolerance = 1e-10) {
  const QuadraticTotal q = total_loss(s);
  const std::size_t n = s.dimension();
  OfflineOptimum out;
  const double lambda = power_iteration_max(q.hessian);
  if (lambda <= 1e-300) {
    out.x_star = dom.linear_minimizer(scaled(q.linear, -1.0));
    return out;
  }
  const double step = 1.0 / lambda;
  Vector x(n, 0.0);
  auto gradient = [&](const Vector& p) {
    Vector g = multiply(q.hessian, p);
    for (std::size_t i = 0; i < n; ++i) g[i] -= q.linear[i];
    return g;
  };
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    Vector g = gradient(x);
    Vector trial = x;
    axpy(-step, g, trial);
    Vector next = dom.project(trial);
    const double moved = distance(next, x);
    x = std::move(next);
    if (moved <= tolerance) {
      out.iterations = it;
      Vector check = x;
      axpy(-step, gradient(x), check);
      out.stationarity = distance(x, dom.project(check));
      if (out.stationarity <= tolerance) {
        out.x_star = std::move(x);
        return out;
      }
    }
  }
  throw NumericError("offline optimum did not converge within " + std::to_string(max_iterations) +
                     " iterations (ill-conditioned stream?)");
}

// Decisions x_t(u) for t = 1..T, u = 0..N-1.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t rounds, std::size_t agents, std::size_t dimension)
      : rounds_(rounds), agents_(agents), dimension_(dimension), data_(rounds * agents * dimension, 0.0) {}

  std::size_t rounds() const { return rounds_; }
  std::size_t agents() const { return agents_; }
  std::size_t dimension() const { return dimension_; }

  std::span<double> at(std::size_t t, std::size_t u) {
    return {data_.data() + ((t - 1) * agents_ + u) * dimension_, dimension_};
  }
  std::span<const double> at(std::size_t t, std::size_t u) const {
    return {data_.data() + ((t - 1) * agents_ + u) * dimension_, dimension_};
  }

  bool operator==(const Trajectory&) const = default;

 private:
  std::size_t rounds_ = 0;
  std::size_t agents_ = 0;
  std::size_t dimension_ = 0;
  std::vector<double> data_;
};

// Cumulative global regret of every agent against a fixed comparator.
struct RegretReport {
  std::size_t rounds = 0;
  std::size_t agents = 0;
  std::vector<double> curves;  // curves[u * T + (t-1)] = Reg_t(u)
  Vector x_star;

  double regret(std::size_t t, std::size_t u) const { return curves[u * rounds + (t - 1)]; }
  double final_regret(std::size_t u) const { return regret(rounds, u); }

  // Reg_t = max_u Reg_t(u).
  double max_regret(std::size_t t) const {
    double best = regret(t, 0);
    for (std::size_t u = 1; u < agents; ++u) best = std::max(best, regret(t, u));
    return best;
  }

  std::vector<double> max_curve() const {
    std::vector<double> out(rounds);
    for (std::size_t t = 1; t <= rounds; ++t) out[t - 1] = max_regret(t);
    return out;
  }
};

// Reg_t(u) = sum_{tau<=t} sum_v [f_tau(v, x_tau(u)) - f_tau(v, x_star)].
inline RegretReport regret_curve(const Trajectory& traj, const LossStream& s, std::span<const double> x_star) {
  if (traj.rounds() != s.rounds() || traj.agents() != s.agents() || traj.dimension() != s.dimension())
    throw ConfigError("trajectory does not match loss stream");
  RegretReport r;
  r.rounds = s.rounds();
  r.agents = s.agents();
  r.x_star.assign(x_star.begin(), x_star.end());
  r.curves.assign(r.rounds * r.agents, 0.0);
  std::vector<double> running(r.agents, 0.0);
  for (std::size_t t = 1; t <= r.rounds; ++t) {
    const double best = s.global_value(t, x_star);
    for (std::size_t u = 0; u < r.agents; ++u) {
      running[u] += s.global_value(t, traj.at(t, u)) - best;
      r.curves[u * r.rounds + (t - 1)] = running[u];
    }
  }
  return r;
}

// CSV `t,agent,y,w_1..w_n` with 1-based t and agent.
inline std::string to_csv(const LossStream& s) {
  std::ostringstream out;
  out.precision(17);
  out << "t,agent,y";
  for (std::size_t i = 1; i <= s.dimension(); ++i) out << ",w_" << i;
  out << '\n';
  for (std::size_t t = 1; t <= s.rounds(); ++t)
    for (std::size_t v = 0; v < s.agents(); ++v) {
      out << t << ',' << v + 1 << ',' << s.label(t, v);
      for (double w : s.feature(t, v)) out << ',' << w;
      out << '\n';
    }
  return out.str();
}

inline LossStream load_stream_csv(std::istream& in, std::size_t agents, std::size_t rounds,
                                  LossStream::Form form, double alpha) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,agent,y", 0) != 0)
    throw ConfigError("loss CSV header must start with 't,agent,y'");
  const std::size_t dimension = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 2;
  if (dimension == 0) throw ConfigError("loss CSV has no feature columns");
  LossStream s(agents, rounds, dimension, form, alpha);
  std::vector<bool> seen(agents * rounds, false);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    long long t = 0;
    long long v = 0;
    double y = 0.0;
    if (!(fields >> t >> v >> y)) throw ConfigError("loss CSV: malformed row " + std::to_string(row));
    if (t < 1 || static_cast<std::size_t>(t) > rounds || v < 1 || static_cast<std::size_t>(v) > agents)
      throw ConfigError("loss CSV: (t, agent) out of range on row " + std::to_string(row));
    const auto tt = static_cast<std::size_t>(t);
    const auto vv = static_cast<std::size_t>(v - 1);
    seen[(tt - 1) * agents + vv] = true;
    s.label(tt, vv) = y;
    for (double& w : s.feature(tt, vv))
      if (!(fields >> w)) throw ConfigError("loss CSV: short row " + std::to_string(row));
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ConfigError("loss CSV: missing (t, agent) rows");
  return s;
}

}  // namespace doco
