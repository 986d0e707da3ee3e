#pragma once

// Small dense linear algebra layer. Everything in this library works on
// networks of at most a few hundred nodes and decision spaces of a few dozen
// coordinates, so plain row-major storage and O(N^3) routines are enough.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace doco {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector scaled(std::span<const double> x, double alpha) {
  Vector out(x.begin(), x.end());
  for (double& v : out) v *= alpha;
  return out;
}

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Vector multiply(const Matrix& a, std::span<const double> x) {
  assert(a.cols() == x.size());
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline double frobenius_norm(const Matrix& a) { return norm(a.data()); }

inline double max_abs_difference(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

// Eigen-decomposition of a symmetric matrix. Eigenvalues are sorted in
// descending order; column j of `vectors` is the eigenvector of values[j].
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

// Cyclic Jacobi rotations. Iterates full sweeps until the off-diagonal
// Frobenius mass drops below `tolerance` (scaled by max(1, ||A||_F)).
inline SymmetricEigen jacobi_eigen(const Matrix& input, double tolerance = 1e-12,
                                   int max_sweeps = 200) {
  if (!input.square()) throw std::invalid_argument("jacobi_eigen: matrix is not square");
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::identity(n);
  const double scale = std::max(1.0, frobenius_norm(input));

  auto off_mass = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_mass() >= tolerance * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_mass() >= tolerance * scale)
    throw std::runtime_error("jacobi_eigen: no convergence within sweep limit");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

// V diag(values) V^T
inline Matrix reconstruct(const SymmetricEigen& eig) {
  const std::size_t n = eig.values.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
      out(i, j) = acc;
    }
  return out;
}

// Largest eigenvalue of a symmetric positive semi-definite matrix by power
// iteration. Returns 0 for the zero matrix.
inline double power_iteration_max(const Matrix& a, double tolerance = 1e-13,
                                  int max_iterations = 100000) {
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  // Deterministic start with non-zero overlap with every coordinate direction.
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i + 1) / n;
  double vn = norm(v);
  for (double& x : v) x /= vn;

  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = multiply(a, v);
    const double wn = norm(w);
    if (wn == 0.0) return 0.0;
    const double next = dot(v, w);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    if (std::abs(next - lambda) <= tolerance * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace doco
