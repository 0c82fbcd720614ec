#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "csrbm/gpc.hpp"

namespace csrbm {

/// Uniform cell-centered velocity grid on [v_min, v_max].
struct VelocityGrid {
  double v_min = -3.0;
  double v_max = 3.0;
  double dv = 1e-2;
  int n_cells = 600;

  static VelocityGrid make(double v_min, double v_max, double dv);
  double center(int j) const { return v_min + (j + 0.5) * dv; }
  Eigen::VectorXd centers() const;
  void validate() const;
};

/// Affine relaxation rate K(theta) = c0 + c1 theta.
struct AffineRate {
  double c0 = 0.5;
  double c1 = 0.01;
  double operator()(double theta) const { return c0 + c1 * theta; }
};

/// H_{hk} = int K(theta) Phi_h Phi_k dpi.
Eigen::MatrixXd assemble_H(const std::function<double(double)>& rate, const GpcBasis& basis, const Quadrature& quad);

/// Chaos modes of the velocity density; row h is f_h on the grid cells.
struct GpcDensity {
  Eigen::MatrixXd coeffs;
  double time = 0.0;
};

struct FgpcTrajectory {
  std::vector<double> times;
  std::vector<double> temperature;
  std::vector<double> mass;      // zeroth mode
  std::vector<double> momentum;  // zeroth mode
  GpcDensity final;
};

/// Largest stable value of max|v-u| ||H|| dt / dv for central differences
/// with classical RK4 (the imaginary-axis stability bound).
inline constexpr double kRk4CentralCfl = 2.8;

/// Conservative central-difference / RK4 solver for
///   d_t f_h = d_v [ (v - u) sum_k H_hk f_k ],  h = 0..M,
/// with zero flux through the domain ends and u the mean velocity of the
/// zeroth mode, re-evaluated every stage. Records diagnostics every
/// `record_every` steps and at the end.
FgpcTrajectory fgpc_solve(const VelocityGrid& grid, const Eigen::MatrixXd& H, const Eigen::VectorXd& f0, double dt,
                          double final_time, int record_every = 1);

/// Mean velocity of the zeroth mode.
double zeroth_mode_mean(const GpcDensity& density, const VelocityGrid& grid);

/// Expected temperature int (v - u)^2 f_0(v) dv; orthonormality collapses the
/// theta integral onto the zeroth mode.
double expected_temperature(const GpcDensity& density, const VelocityGrid& grid);

/// Particle estimate: quadrature-weighted average over theta nodes of the
/// per-node velocity variance (summed over axes).
double expected_temperature(const GpcEnsemble& ens, const GpcBasis& basis, const Quadrature& quad);

/// Two-bump density beta [exp(-(v-mu)^2 / 2 sigma2) + exp(-(v+mu)^2 / 2 sigma2)]
/// at the grid centers, normalized to unit discrete mass.
Eigen::VectorXd bimodal_density(const VelocityGrid& grid, double mu, double sigma2);

}  // namespace csrbm
