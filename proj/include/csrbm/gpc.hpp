#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "csrbm/integrators.hpp"
#include "csrbm/kernels.hpp"
#include "csrbm/particle_dynamics.hpp"

namespace csrbm {

/// Law of the random kernel parameter theta. Only uniform(a, b) is
/// supported (Legendre chaos).
struct RandomParamSpec {
  double a = -1.0;
  double b = 1.0;

  void validate() const;
  /// Affine map of [a, b] onto the reference interval [-1, 1].
  double to_reference(double theta) const { return (2.0 * theta - a - b) / (b - a); }
};

/// Legendre polynomial P_k(xi) by the three-term recurrence.
template <typename Scalar>
Scalar legendre(int k, Scalar xi) {
  if (k == 0) return Scalar(1);
  Scalar p0 = Scalar(1);
  Scalar p1 = xi;
  for (int n = 2; n <= k; ++n) {
    Scalar p2 = (Scalar(2 * n - 1) * xi * p1 - Scalar(n - 1) * p0) / Scalar(n);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// Nodes and probability weights (summing to one) for integrals against
/// the law of theta.
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with q_order points mapped to [a, b], weights
/// normalized to the uniform probability measure. Exact for polynomials of
/// degree <= 2 q_order - 1.
Quadrature quadrature(const RandomParamSpec& param, int q_order);

/// Orthonormal Legendre chaos Phi_0..Phi_K on uniform(a, b):
/// Phi_k(theta) = sqrt(2k + 1) P_k(xi(theta)).
struct GpcBasis {
  int order = 0;
  RandomParamSpec param;
  Eigen::VectorXd normalization;

  double operator()(int k, double theta) const {
    return normalization[k] * legendre(k, param.to_reference(theta));
  }
  Eigen::VectorXd evaluate(double theta) const;
};

GpcBasis build_basis(const RandomParamSpec& param, int order);

/// Gram matrix int Phi_l Phi_k dpi under the given rule.
Eigen::MatrixXd gram_matrix(const GpcBasis& basis, const Quadrature& quad);

inline int default_quadrature_order(int gpc_order) { return gpc_order + 3; }

/// Per-particle chaos coefficients. Row i of xhat holds mode k, axis c at
/// column k * dim + c; vhat likewise.
struct GpcEnsemble {
  int order = 0;
  Eigen::MatrixXd xhat;
  Eigen::MatrixXd vhat;
  double time = 0.0;

  int size() const { return static_cast<int>(xhat.rows()); }
  int modes() const { return order + 1; }
  int dim() const { return static_cast<int>(xhat.cols()) / (order + 1); }

  /// Deterministic initial data: mode 0 carries the state, other modes are 0.
  static GpcEnsemble from_ensemble(const Ensemble& ens, int order);

  /// x_i^K(theta) and v_i^K(theta) for all particles.
  Ensemble evaluate(const GpcBasis& basis, double theta) const;
  /// Mode-k slice as an ordinary ensemble.
  Ensemble mode(int k) const;
  /// Sum over particles of vhat for each mode; row k is the mode-k momentum.
  Eigen::MatrixXd mode_momenta() const;
  void validate() const;
};

/// Precomputed basis values at the quadrature nodes, shared by the
/// coefficient assembly in the RBM-gPC right-hand side.
struct GpcCoupling {
  GpcCoupling(const KernelSpec& spec, const GpcBasis& basis, const Quadrature& quad);

  const KernelSpec& spec;
  int order;
  Eigen::VectorXd thetas;
  Eigen::VectorXd weights;
  Eigen::MatrixXd phi;  // phi(q, k) = Phi_k(theta_q)

  /// e_{lk} for the pair (i, j) given their position coefficients (modes
  /// contiguous, axis fastest). Exactly symmetric in (l, k) and in (i, j).
  void pair_coeffs(const double* xi, const double* xj, int d, Eigen::MatrixXd& e) const;
  /// The coefficient matrix of a distance-independent kernel.
  Eigen::MatrixXd shared_coeffs() const;
};

/// e_{lk}^{ij} = int psi(|x_j^K - x_i^K|, theta) Phi_k Phi_l dpi by quadrature;
/// xi, xj are (K+1) x d coefficient arrays.
Eigen::MatrixXd pair_coeffs(const Eigen::MatrixXd& xi, const Eigen::MatrixXd& xj, const KernelSpec& spec,
                            const GpcBasis& basis, const Quadrature& quad);

enum class CoefficientMode {
  recompute,  // e^{ij} re-assembled at every integrator stage
  frozen      // e^{ij} assembled once per batch interval (extra O(tau) error)
};

/// Derivative of a p-particle batch of chaos coefficients laid out as
/// [Xhat (p rows of (K+1) d) | Vhat (same)], prefactor kappa/(p-1).
void gpc_batch_rhs(const GpcCoupling& coupling, int p, int d, const double* y, double* dy,
                   const std::vector<Eigen::MatrixXd>* frozen = nullptr);

/// Algorithm-level RBM step on the coupled chaos system: each batch of the
/// plan evolves independently for time tau.
GpcEnsemble rbm_gpc_step(const GpcEnsemble& ens, const BatchPlan& plan, const KernelSpec& spec,
                         const GpcBasis& basis, const Quadrature& quad, const StepperSpec& stepper, double tau,
                         CoefficientMode mode = CoefficientMode::recompute);

/// Uniform histogram grid over a subset of the 2d phase-space axes
/// (axis a < d is x_a, axis a >= d is v_{a-d}). Every axis has edge h.
struct PhaseGrid {
  std::vector<int> axes;
  std::vector<double> lo;
  std::vector<int> cells;
  double h = 0.0;

  /// All listed axes share [lo, hi] with `cells_per_axis` cells.
  static PhaseGrid uniform(std::vector<int> axes, double lo, double hi, int cells_per_axis);
  static PhaseGrid full(int dim, double lo, double hi, int cells_per_axis);

  std::size_t cell_count() const;
  double cell_volume() const { return std::pow(h, static_cast<double>(axes.size())); }
  double upper(std::size_t a) const { return lo[a] + h * cells[a]; }
  /// Center coordinates of a flat cell index (last axis fastest).
  std::vector<double> center(std::size_t cell) const;
  void validate() const;
  bool same_as(const PhaseGrid& other) const;
};

struct Histogram {
  PhaseGrid grid;
  Eigen::VectorXd density;
  double out_of_domain_mass = 0.0;

  double integral() const { return density.sum() * grid.cell_volume(); }
};

/// Histogram of one ensemble with mass 1/N per particle, density scaled by
/// 1/|C_l|.
Histogram histogram(const Ensemble& ens, const PhaseGrid& grid);

/// Quadrature-weighted average over theta nodes of the per-node particle
/// histograms: an estimate of E_theta of the reconstructed density.
Histogram reconstruct_expected_density(const GpcEnsemble& ens, const PhaseGrid& grid, const GpcBasis& basis,
                                       const Quadrature& quad);

/// Separable Gaussian smoothing of a histogram (display only).
Histogram gaussian_smooth(const Histogram& hist, double bandwidth);

}  // namespace csrbm
