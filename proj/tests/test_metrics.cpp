#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "csrbm/errors.hpp"
#include "csrbm/metrics.hpp"

using namespace csrbm;

namespace {

Eigen::MatrixXd gaussian(int m, int d, unsigned seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(m, d);
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < d; ++c) a(i, c) = g(rng) + shift;
  return a;
}

double brute_force(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double q) {
  std::vector<int> perm(static_cast<std::size_t>(a.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0.0;
    for (int i = 0; i < a.rows(); ++i) c += std::pow((a.row(i) - b.row(perm[i])).norm(), q);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / a.rows(), 1.0 / q);
}

}  // namespace

TEST(Wasserstein1d, ShiftedSample) {
  const std::vector<double> a{0.0, 1.0, 2.0}, b{3.5, 1.5, 2.5};
  EXPECT_NEAR(wasserstein_1d(a, b, 2.0), 1.5, 1e-15);
  EXPECT_NEAR(wasserstein_1d(a, b, 1.0), 1.5, 1e-15);
  EXPECT_EQ(wasserstein_1d(a, a, 2.0), 0.0);
}

TEST(Wasserstein1d, SizeMismatchRejected) {
  const std::vector<double> a{0.0, 1.0}, b{0.0};
  EXPECT_THROW(wasserstein_1d(a, b, 2.0), UsageError);
}

TEST(Assignment, MatchesSortedCouplingIn1d) {
  const Eigen::MatrixXd a = gaussian(60, 1, 1), b = gaussian(60, 1, 2, 0.5);
  const double w = wasserstein_1d({a.data(), 60}, {b.data(), 60}, 2.0);
  EXPECT_NEAR(wasserstein_assignment(a, b, 2.0), w, 1e-12);
}

TEST(Assignment, MatchesBruteForce) {
  for (unsigned s = 0; s < 5; ++s) {
    const int m = 3 + static_cast<int>(s % 4);
    const Eigen::MatrixXd a = gaussian(m, 2, 10 + s), b = gaussian(m, 2, 20 + s);
    for (double q : {1.0, 2.0}) EXPECT_NEAR(wasserstein_assignment(a, b, q), brute_force(a, b, q), 1e-12);
  }
}

TEST(Assignment, SolverReturnsPermutation) {
  const Eigen::MatrixXd cost = Eigen::MatrixXd::Random(40, 40).cwiseAbs();
  std::vector<int> cols = solve_assignment(cost);
  std::sort(cols.begin(), cols.end());
  for (int j = 0; j < 40; ++j) EXPECT_EQ(cols[j], j);
}

TEST(Assignment, MetricAxioms) {
  const Eigen::MatrixXd a = gaussian(30, 2, 3), b = gaussian(30, 2, 4), c = gaussian(30, 2, 5, 1.0);
  EXPECT_EQ(wasserstein_assignment(a, a, 2.0), 0.0);
  EXPECT_NEAR(wasserstein_assignment(a, b, 2.0), wasserstein_assignment(b, a, 2.0), 1e-12);
  EXPECT_LE(wasserstein_assignment(a, c, 2.0),
            wasserstein_assignment(a, b, 2.0) + wasserstein_assignment(b, c, 2.0) + 1e-12);
  // Permuting rows does not change the empirical measure.
  Eigen::MatrixXd p = a.colwise().reverse();
  EXPECT_NEAR(wasserstein_assignment(p, b, 2.0), wasserstein_assignment(a, b, 2.0), 1e-12);
}

TEST(Assignment, TranslationDistance) {
  const Eigen::MatrixXd a = gaussian(25, 2, 6);
  Eigen::MatrixXd b = a;
  b.rowwise() += Eigen::RowVector2d(3.0, 4.0);
  EXPECT_NEAR(wasserstein_assignment(a, b, 2.0), 5.0, 1e-12);
}

TEST(Assignment, CapEnforced) {
  EXPECT_THROW(wasserstein_assignment(gaussian(20, 1, 1), gaussian(20, 1, 2), 2.0, 10), UsageError);
  EXPECT_THROW(wasserstein_assignment(gaussian(20, 1, 1), gaussian(21, 1, 2), 2.0), UsageError);
}

TEST(Subsampled, ExactBelowCap) {
  const Eigen::MatrixXd a = gaussian(40, 2, 7), b = gaussian(40, 2, 8);
  const WassersteinEstimate w = wasserstein_subsampled(a, b, 2.0, 4, 1);
  EXPECT_TRUE(w.exact);
  EXPECT_EQ(w.value, wasserstein_assignment(a, b, 2.0));
}

TEST(Subsampled, EstimateAboveCap) {
  const Eigen::MatrixXd a = gaussian(400, 1, 9);
  Eigen::MatrixXd b = a.array() + 2.0;
  const WassersteinEstimate w = wasserstein_subsampled(a, b, 2.0, 8, 3, 100, true);
  EXPECT_FALSE(w.exact);
  EXPECT_EQ(w.replicates, 8);
  // Paired subsets of a pure translation are still translations.
  EXPECT_NEAR(w.value, 2.0, 1e-12);
  const WassersteinEstimate again = wasserstein_subsampled(a, b, 2.0, 8, 3, 100, true);
  EXPECT_EQ(again.value, w.value);
}

TEST(ResampleRows, SubsetWithoutReplacement) {
  Eigen::MatrixXd a(10, 1);
  for (int i = 0; i < 10; ++i) a(i, 0) = i;
  const Eigen::MatrixXd r = resample_rows(a, 6, 4);
  ASSERT_EQ(r.rows(), 6);
  for (int i = 1; i < 6; ++i) EXPECT_LT(r(i - 1, 0), r(i, 0));
}

TEST(TvError, DisjointAndIdentical) {
  const PhaseGrid grid = PhaseGrid::uniform({0}, 0.0, 1.0, 4);
  Histogram a{grid, Eigen::VectorXd::Zero(4), 0.0}, b{grid, Eigen::VectorXd::Zero(4), 0.0};
  a.density[0] = 4.0;
  b.density[3] = 4.0;
  EXPECT_NEAR(tv_error(a, b), 2.0, 1e-15);
  EXPECT_EQ(tv_error(a, a), 0.0);
  const Histogram c{PhaseGrid::uniform({0}, 0.0, 1.0, 5), Eigen::VectorXd::Zero(5), 0.0};
  EXPECT_THROW(tv_error(a, c), UsageError);
}

TEST(MseTemperature, HandValue) {
  const std::vector<double> t{1.0, 2.0, 4.0};
  EXPECT_NEAR(mse_temperature(t, 2.0), (1.0 + 0.0 + 4.0) / 3.0, 1e-15);
}

TEST(PhasePoints, Layout) {
  Eigen::MatrixXd x(2, 1), v(2, 1);
  x << 1.0, 2.0;
  v << 3.0, 4.0;
  const Eigen::MatrixXd p = phase_points({x, v});
  EXPECT_EQ(p(1, 0), 2.0);
  EXPECT_EQ(p(1, 1), 4.0);
}
