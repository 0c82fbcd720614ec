#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "csrbm/errors.hpp"
#include "csrbm/integrators.hpp"

using namespace csrbm;
using Vec = Eigen::VectorXd;

namespace {

auto decay = [](const Vec& y, Vec& dy) { dy = -y; };

double global_error(Scheme scheme, double dt) {
  StepperSpec spec;
  spec.scheme = scheme;
  spec.substeps = static_cast<int>(std::lround(1.0 / dt));
  Vec y = Vec::Ones(1);
  Rk4Workspace<double> ws;
  advance<double>(decay, y, 1.0, spec, ws);
  return std::abs(y[0] - std::exp(-1.0));
}

}  // namespace

TEST(Integrators, ZeroRhsIsIdentity) {
  auto zero = [](const Vec& y, Vec& dy) { dy = Vec::Zero(y.size()); };
  Vec y(3);
  y << 1.0, -2.0, 3.5;
  EXPECT_EQ(rk4_step<double>(zero, y, 0.3), y);
  EXPECT_EQ(euler_step<double>(zero, y, 0.3), y);
}

TEST(Integrators, Rk4ExponentialStep) {
  const Vec y = rk4_step<double>(decay, Vec::Ones(1), 0.1);
  EXPECT_NEAR(y[0], 0.90483750, 5e-9);
  EXPECT_LT(std::abs(y[0] - std::exp(-0.1)), 1e-7);
}

TEST(Integrators, EulerExponentialStep) {
  EXPECT_EQ(euler_step<double>(decay, Vec::Ones(1), 0.1)[0], 0.9);
}

TEST(Integrators, LinearInvariantPreserved) {
  // Bounded nonlinear field whose components sum to zero.
  auto rhs = [](const Vec& y, Vec& dy) {
    dy.resize(3);
    dy << std::sin(y[1]) - std::sin(y[2]), std::sin(y[2]) - std::sin(y[0]), std::sin(y[0]) - std::sin(y[1]);
  };
  Vec y(3);
  y << 0.3, -1.2, 2.5;
  const double sum0 = y.sum();
  for (int k = 0; k < 50; ++k) y = rk4_step<double>(rhs, y, 0.05, k);
  EXPECT_LE(std::abs(y.sum() - sum0), 1e-13 * std::abs(sum0));
  y << 0.3, -1.2, 2.5;
  for (int k = 0; k < 50; ++k) y = euler_step<double>(rhs, y, 0.05, k);
  EXPECT_LE(std::abs(y.sum() - sum0), 1e-13 * std::abs(sum0));
}

TEST(Integrators, ConvergenceOrder) {
  const double dts[] = {0.1, 0.05, 0.025};
  for (int i = 0; i < 2; ++i) {
    const double rk_ratio = global_error(Scheme::rk4, dts[i]) / global_error(Scheme::rk4, dts[i + 1]);
    const double eu_ratio = global_error(Scheme::euler, dts[i]) / global_error(Scheme::euler, dts[i + 1]);
    EXPECT_GT(rk_ratio, 16.0 / 2.0);
    EXPECT_LT(rk_ratio, 16.0 * 2.0);
    EXPECT_GT(eu_ratio, 2.0 / 2.0);
    EXPECT_LT(eu_ratio, 2.0 * 2.0);
  }
}

TEST(Integrators, Deterministic) {
  auto rhs = [](const Vec& y, Vec& dy) { dy = y.array().sin(); };
  Vec y = Vec::LinSpaced(5, -1.0, 1.0);
  EXPECT_EQ(rk4_step<double>(rhs, y, 0.01), rk4_step<double>(rhs, y, 0.01));
}

TEST(Integrators, NonFiniteNamesStep) {
  auto bad = [](const Vec& y, Vec& dy) { dy = Vec::Constant(y.size(), std::numeric_limits<double>::quiet_NaN()); };
  try {
    rk4_step<double>(bad, Vec::Ones(2), 0.1, 17);
    FAIL() << "expected a numerical failure";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
}

TEST(Integrators, SubstepsSplitTheInterval) {
  StepperSpec spec;
  spec.substeps = 4;
  Vec a = Vec::Ones(1);
  Rk4Workspace<double> ws;
  advance<double>(decay, a, 0.2, spec, ws);
  Vec b = Vec::Ones(1);
  for (int s = 0; s < 4; ++s) b = rk4_step<double>(decay, b, 0.05);
  EXPECT_EQ(a[0], b[0]);
}

TEST(Integrators, SpecValidation) {
  StepperSpec spec;
  spec.substeps = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.substeps = 1;
  spec.dt = 0.0;
  EXPECT_THROW(spec.validate(), ConfigError);
}
