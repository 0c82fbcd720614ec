#include "csrbm/initial.hpp"

#include <cmath>
#include <numbers>

#include "csrbm/errors.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

std::string to_string(InitialFamily family) {
  switch (family) {
    case InitialFamily::bimodal1d_v: return "bimodal1d_v";
    case InitialFamily::bivariate_bimodal: return "bivariate_bimodal";
    case InitialFamily::annulus2d: return "annulus2d";
    case InitialFamily::point_mass: return "point_mass";
    case InitialFamily::custom_gaussian: return "custom_gaussian";
  }
  return "unknown";
}

InitialFamily initial_family_from_string(const std::string& name) {
  if (name == "bimodal1d_v") return InitialFamily::bimodal1d_v;
  if (name == "bivariate_bimodal") return InitialFamily::bivariate_bimodal;
  if (name == "annulus2d") return InitialFamily::annulus2d;
  if (name == "point_mass") return InitialFamily::point_mass;
  if (name == "custom_gaussian") return InitialFamily::custom_gaussian;
  throw ConfigError("unknown initial distribution '" + name + "'");
}

InitialDistribution InitialDistribution::homogeneous_bimodal(double mu, double sigma2) {
  InitialDistribution d;
  d.family = InitialFamily::bimodal1d_v;
  d.mu = mu;
  d.sigma2 = sigma2;
  return d;
}

InitialDistribution InitialDistribution::cs1d() {
  InitialDistribution d;
  d.family = InitialFamily::bivariate_bimodal;
  d.mu = 1.0;
  d.sigma_x2 = 0.5;
  d.sigma_v2 = 0.2;
  return d;
}

InitialDistribution InitialDistribution::annulus() {
  InitialDistribution d;
  d.family = InitialFamily::annulus2d;
  return d;
}

int InitialDistribution::required_dim() const {
  switch (family) {
    case InitialFamily::bimodal1d_v:
    case InitialFamily::bivariate_bimodal: return 1;
    case InitialFamily::annulus2d: return 2;
    case InitialFamily::point_mass:
    case InitialFamily::custom_gaussian: return 0;
  }
  return 0;
}

namespace {

double component(const std::vector<double>& values, int c) {
  if (values.empty()) return 0.0;
  if (static_cast<std::size_t>(c) >= values.size()) throw ConfigError("initial distribution: vector shorter than dim");
  return values[static_cast<std::size_t>(c)];
}

}  // namespace

Ensemble sample_initial(const InitialDistribution& dist, int n, int dim, std::uint64_t seed) {
  if (n < 1) throw ConfigError("initial distribution: need n >= 1");
  if (dim < 1) throw ConfigError("initial distribution: need dim >= 1");
  const int required = dist.required_dim();
  if (required != 0 && required != dim)
    throw ConfigError("initial distribution '" + to_string(dist.family) + "' requires dim = " +
                      std::to_string(required));

  auto rng = make_rng(seed, {stream::initial});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  Ensemble ens(Eigen::MatrixXd::Zero(n, dim), Eigen::MatrixXd::Zero(n, dim));
  for (int i = 0; i < n; ++i) {
    switch (dist.family) {
      case InitialFamily::bimodal1d_v: {
        const double centre = coin(rng) ? dist.mu : -dist.mu;
        ens.velocities(i, 0) = centre + std::sqrt(dist.sigma2) * normal(rng);
        break;
      }
      case InitialFamily::bivariate_bimodal: {
        ens.positions(i, 0) = std::sqrt(dist.sigma_x2) * normal(rng);
        const double centre = coin(rng) ? dist.mu : -dist.mu;
        ens.velocities(i, 0) = centre + std::sqrt(dist.sigma_v2) * normal(rng);
        break;
      }
      case InitialFamily::annulus2d: {
        const double r2_lo = dist.r_inner * dist.r_inner;
        const double r2_hi = dist.r_outer * dist.r_outer;
        const double r = std::sqrt(r2_lo + (r2_hi - r2_lo) * unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        const double x1 = r * std::cos(phi);
        const double x2 = r * std::sin(phi);
        const double norm = std::hypot(x1, x2);
        ens.positions(i, 0) = x1;
        ens.positions(i, 1) = x2;
        // e_z x (x1, x2, 0) = (-x2, x1, 0)
        ens.velocities(i, 0) = -x2 / norm;
        ens.velocities(i, 1) = x1 / norm;
        break;
      }
      case InitialFamily::point_mass:
        for (int c = 0; c < dim; ++c) {
          ens.positions(i, c) = component(dist.position, c);
          ens.velocities(i, c) = component(dist.velocity, c);
        }
        break;
      case InitialFamily::custom_gaussian:
        for (int c = 0; c < dim; ++c) {
          ens.positions(i, c) = component(dist.position, c) + std::sqrt(dist.sigma_x2) * normal(rng);
          ens.velocities(i, c) = component(dist.velocity, c) + std::sqrt(dist.sigma_v2) * normal(rng);
        }
        break;
    }
  }
  return ens;
}

}  // namespace csrbm
