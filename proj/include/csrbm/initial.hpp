#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csrbm/particle_dynamics.hpp"

namespace csrbm {

enum class InitialFamily { bimodal1d_v, bivariate_bimodal, annulus2d, point_mass, custom_gaussian };

std::string to_string(InitialFamily family);
InitialFamily initial_family_from_string(const std::string& name);

/// Initial law f0 of the particle states.
///
///   bimodal1d_v:        d = 1, x = 0, v ~ mixture of N(+-mu, sigma2)
///   bivariate_bimodal:  d = 1, x ~ N(0, sigma_x2), v ~ mixture of N(+-mu, sigma_v2)
///   annulus2d:          d = 2, x area-uniform on r_inner <= |x| <= r_outer,
///                       v = (k x x)/|x| (unit, counterclockwise)
///   point_mass:         every particle at (position, velocity)
///   custom_gaussian:    x ~ N(position, sigma_x2 I), v ~ N(velocity, sigma_v2 I)
struct InitialDistribution {
  InitialFamily family = InitialFamily::bimodal1d_v;
  double mu = 0.5;
  double sigma2 = 0.1;
  double sigma_x2 = 0.5;
  double sigma_v2 = 0.2;
  double r_inner = 0.5;
  double r_outer = 1.0;
  std::vector<double> position;
  std::vector<double> velocity;

  static InitialDistribution homogeneous_bimodal(double mu = 0.5, double sigma2 = 0.1);
  static InitialDistribution cs1d();
  static InitialDistribution annulus();

  /// Phase-space dimension the family requires; 0 if any.
  int required_dim() const;
};

/// N i.i.d. samples from f0; a fixed seed yields a fixed ensemble.
Ensemble sample_initial(const InitialDistribution& dist, int n, int dim, std::uint64_t seed);

}  // namespace csrbm
