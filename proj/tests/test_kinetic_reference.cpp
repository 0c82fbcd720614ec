#include <cmath>

#include <gtest/gtest.h>

#include "csrbm/errors.hpp"
#include "csrbm/kinetic_reference.hpp"

using namespace csrbm;

TEST(AssembleH, AffineRateOnUnitInterval) {
  const GpcBasis b = build_basis({0.0, 1.0}, 3);
  const Eigen::MatrixXd H = assemble_H(AffineRate{0.5, 0.01}, b, quadrature(b.param, 6));
  EXPECT_NEAR(H(0, 0), 0.505, 1e-15);
  EXPECT_NEAR(H(0, 1), 0.01 / (2.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(H(0, 1), 0.0028868, 1e-7);
  EXPECT_NEAR(H(0, 2), 0.0, 1e-15);
  EXPECT_EQ(H, H.transpose());
}

TEST(VelocityGrid, Layout) {
  const VelocityGrid g = VelocityGrid::make(-3.0, 3.0, 0.01);
  EXPECT_EQ(g.n_cells, 600);
  EXPECT_NEAR(g.center(0), -2.995, 1e-15);
  EXPECT_THROW(VelocityGrid::make(1.0, -1.0, 0.1), ConfigError);
}

TEST(BimodalDensity, UnitMassSymmetric) {
  const VelocityGrid g = VelocityGrid::make(-3.0, 3.0, 0.01);
  const Eigen::VectorXd f = bimodal_density(g, 1.0, 0.2);
  EXPECT_NEAR(f.sum() * g.dv, 1.0, 1e-13);
  EXPECT_NEAR(f.head(300).sum(), f.tail(300).sum(), 1e-10);
}

TEST(FgpcSolve, SingleModeTemperatureDecay) {
  // M = 0: d_t f = c d_v((v - u) f) gives T(t) = T(0) exp(-2 c t).
  const VelocityGrid g = VelocityGrid::make(-3.0, 3.0, 0.01);
  const Eigen::VectorXd f0 = bimodal_density(g, 1.0, 0.2);
  Eigen::MatrixXd H(1, 1);
  H << 0.505;
  const FgpcTrajectory t = fgpc_solve(g, H, f0, 1e-3, 0.5, 100);
  const double t0 = t.temperature.front();
  EXPECT_NEAR(t0, 1.2, 1e-4);
  EXPECT_NEAR(t.temperature.back(), t0 * std::exp(-2.0 * 0.505 * 0.5), 1e-4 * t0);
  EXPECT_EQ(t.times.size(), 6u);
}

TEST(FgpcSolve, ExpectedTemperatureMatchesThetaAverage) {
  // Each theta relaxes at its own rate: E[T] = T0 int exp(-2 K(theta) t) dtheta.
  const VelocityGrid g = VelocityGrid::make(-3.0, 3.0, 0.01);
  const GpcBasis b = build_basis({0.0, 1.0}, 3);
  const Eigen::MatrixXd H = assemble_H(AffineRate{0.5, 0.01}, b, quadrature(b.param, 6));
  const FgpcTrajectory t = fgpc_solve(g, H, bimodal_density(g, 1.0, 0.2), 1e-3, 0.5, 500);
  const double t0 = t.temperature.front();
  const double s = 2.0 * 0.01 * 0.5;
  const double oracle = t0 * std::exp(-2.0 * 0.5 * 0.5) * (1.0 - std::exp(-s)) / s;
  EXPECT_NEAR(t.temperature.back(), oracle, 1e-4 * t0);
}

TEST(FgpcSolve, ConservesMassAndMomentum) {
  // Wide domain: the density tail at the walls is below roundoff.
  const VelocityGrid g = VelocityGrid::make(-5.0, 5.0, 0.02);
  const GpcBasis b = build_basis({0.0, 1.0}, 2);
  const Eigen::MatrixXd H = assemble_H(AffineRate{0.5, 0.01}, b, quadrature(b.param, 5));
  Eigen::VectorXd f0 = bimodal_density(g, 1.0, 0.2);
  for (int j = 0; j < g.n_cells; ++j) f0[j] *= 1.0 + 0.3 * std::tanh(g.center(j));
  f0 /= f0.sum() * g.dv;
  const FgpcTrajectory t = fgpc_solve(g, H, f0, 2e-3, 1.0, 50);
  for (std::size_t s = 0; s < t.times.size(); ++s) {
    EXPECT_NEAR(t.mass[s], 1.0, 1e-12);
    EXPECT_NEAR(t.momentum[s], t.momentum.front(), 1e-12);
  }
  EXPECT_NEAR(zeroth_mode_mean(t.final, g), t.momentum.front(), 1e-12);
}

TEST(FgpcSolve, CflViolationIsNumericalError) {
  const VelocityGrid g = VelocityGrid::make(-3.0, 3.0, 0.01);
  Eigen::MatrixXd H(1, 1);
  H << 0.505;
  EXPECT_THROW(fgpc_solve(g, H, bimodal_density(g, 1.0, 0.2), 0.1, 0.5), NumericalError);
}

TEST(FgpcSolve, ShapeMismatchIsUsageError) {
  const VelocityGrid g = VelocityGrid::make(-3.0, 3.0, 0.01);
  EXPECT_THROW(fgpc_solve(g, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(10), 1e-3, 0.1), UsageError);
}

TEST(ExpectedTemperature, ParticleEstimateOfDeterministicData) {
  Eigen::MatrixXd v(4, 1);
  v << -1.0, 1.0, -1.0, 1.0;
  const GpcBasis b = build_basis({0.0, 1.0}, 1);
  const GpcEnsemble e = GpcEnsemble::from_ensemble({Eigen::MatrixXd::Zero(4, 1), v}, 1);
  EXPECT_NEAR(expected_temperature(e, b, quadrature(b.param, 4)), 1.0, 1e-15);
}
