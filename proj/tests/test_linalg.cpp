#include <gtest/gtest.h>

#include <random>

#include "doco/linalg.hpp"
#include "support.hpp"

using namespace doco;
using doco::test::to_eigen;

TEST(Linalg, VectorHelpers) {
  const Vector a{1, 2, 2};
  const Vector b{0, 1, 0};
  EXPECT_DOUBLE_EQ(dot(a, b), 2.0);
  EXPECT_DOUBLE_EQ(norm(a), 3.0);
  EXPECT_DOUBLE_EQ(distance(a, b), std::sqrt(1 + 1 + 4));
  Vector y = b;
  axpy(2.0, a, y);
  EXPECT_EQ(y, (Vector{2, 5, 4}));
  EXPECT_EQ(scaled(a, -1.0), (Vector{-1, -2, -2}));
}

TEST(Linalg, MultiplyMatchesEigen) {
  std::mt19937_64 rng(3);
  const Matrix a = test::random_matrix(rng, 5, 7);
  const Matrix b = test::random_matrix(rng, 7, 4);
  const Eigen::MatrixXd ref = to_eigen(a) * to_eigen(b);
  const Matrix c = multiply(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c(i, j), ref(i, j), 1e-12);
  EXPECT_EQ(transpose(transpose(a)), a);
}

class JacobiEigen : public ::testing::TestWithParam<std::size_t> {};

TEST_P(JacobiEigen, MatchesEigenSolver) {
  std::mt19937_64 rng(GetParam());
  const std::size_t n = 2 + GetParam() % 30;
  const Matrix a = test::random_symmetric(rng, n);
  const SymmetricEigen eig = jacobi_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
  ASSERT_EQ(ref.info(), Eigen::Success);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(eig.values[i], ref.eigenvalues()(n - 1 - i), 1e-9);
  for (std::size_t i = 1; i < n; ++i) EXPECT_GE(eig.values[i - 1], eig.values[i]);
  EXPECT_LT(max_abs_difference(reconstruct(eig), a), 1e-9);
  // Orthonormal eigenvectors.
  const Matrix vtv = multiply(transpose(eig.vectors), eig.vectors);
  EXPECT_LT(max_abs_difference(vtv, Matrix::identity(n)), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(RandomSymmetric, JacobiEigen, ::testing::Range<std::size_t>(0, 40));

TEST(Linalg, PowerIterationFindsLargestEigenvalueOfPsdMatrix) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix g = test::random_matrix(rng, 30, 8);
    const Matrix a = multiply(transpose(g), g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
    EXPECT_NEAR(power_iteration_max(a), ref.eigenvalues().maxCoeff(), 1e-8 * ref.eigenvalues().maxCoeff());
  }
}

TEST(Linalg, DiagonalMatrixIsItsOwnSpectrum) {
  Matrix d(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 5;
  d(2, 2) = -2;
  const SymmetricEigen eig = jacobi_eigen(d);
  EXPECT_EQ(eig.values, (Vector{5, 1, -2}));
}
