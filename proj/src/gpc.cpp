#include "csrbm/gpc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "csrbm/errors.hpp"
#include "csrbm/parallel.hpp"

namespace csrbm {

void RandomParamSpec::validate() const {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw ConfigError("random parameter: uniform(a, b) needs finite a < b");
}

Quadrature quadrature(const RandomParamSpec& param, int q_order) {
  param.validate();
  if (q_order < 1) throw ConfigError("quadrature order must be >= 1");
  const int n = q_order;
  Quadrature quad{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess; roots are symmetric.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = n == 1 ? x : p1;
      double pn1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      double step = pn / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    if (n % 2 == 1 && i == n / 2) x = 0.0;
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double pn = n == 1 ? x : p1;
    double pn1 = n == 1 ? 1.0 : p0;
    dp = n == 1 ? 1.0 : n * (x * pn - pn1) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Ascending order: node i from the right end mirrors node n-1-i.
    quad.nodes[n - 1 - i] = x;
    quad.nodes[i] = -x;
    quad.weights[n - 1 - i] = w;
    quad.weights[i] = w;
  }
  const double half_width = 0.5 * (param.b - param.a);
  const double mid = 0.5 * (param.a + param.b);
  quad.nodes = (mid + half_width * quad.nodes.array()).matrix();
  quad.weights /= quad.weights.sum();
  return quad;
}

Eigen::VectorXd GpcBasis::evaluate(double theta) const {
  Eigen::VectorXd out(order + 1);
  const double xi = param.to_reference(theta);
  double p0 = 1.0;
  double p1 = xi;
  out[0] = normalization[0];
  if (order >= 1) out[1] = normalization[1] * xi;
  for (int k = 2; k <= order; ++k) {
    double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
    out[k] = normalization[k] * p2;
    p0 = p1;
    p1 = p2;
  }
  return out;
}

GpcBasis build_basis(const RandomParamSpec& param, int order) {
  param.validate();
  if (order < 0) throw ConfigError("gPC order must be >= 0");
  GpcBasis basis;
  basis.order = order;
  basis.param = param;
  basis.normalization.resize(order + 1);
  for (int k = 0; k <= order; ++k) basis.normalization[k] = std::sqrt(2.0 * k + 1.0);
  return basis;
}

Eigen::MatrixXd gram_matrix(const GpcBasis& basis, const Quadrature& quad) {
  const int m = basis.order + 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (int q = 0; q < quad.size(); ++q) {
    Eigen::VectorXd phi = basis.evaluate(quad.nodes[q]);
    g.noalias() += quad.weights[q] * phi * phi.transpose();
  }
  return g;
}

GpcEnsemble GpcEnsemble::from_ensemble(const Ensemble& ens, int order) {
  ens.validate();
  const int n = ens.size();
  const int d = ens.dim();
  GpcEnsemble g;
  g.order = order;
  g.time = ens.time;
  g.xhat = Eigen::MatrixXd::Zero(n, (order + 1) * d);
  g.vhat = Eigen::MatrixXd::Zero(n, (order + 1) * d);
  g.xhat.leftCols(d) = ens.positions;
  g.vhat.leftCols(d) = ens.velocities;
  return g;
}

Ensemble GpcEnsemble::evaluate(const GpcBasis& basis, double theta) const {
  const int d = dim();
  Eigen::VectorXd phi = basis.evaluate(theta);
  Ensemble out(Eigen::MatrixXd::Zero(size(), d), Eigen::MatrixXd::Zero(size(), d), time);
  for (int k = 0; k <= order; ++k) {
    out.positions += phi[k] * xhat.middleCols(k * d, d);
    out.velocities += phi[k] * vhat.middleCols(k * d, d);
  }
  return out;
}

Ensemble GpcEnsemble::mode(int k) const {
  const int d = dim();
  return Ensemble(xhat.middleCols(k * d, d), vhat.middleCols(k * d, d), time);
}

Eigen::MatrixXd GpcEnsemble::mode_momenta() const {
  const int d = dim();
  Eigen::MatrixXd out(modes(), d);
  Eigen::RowVectorXd sums = vhat.colwise().sum();
  for (int k = 0; k < modes(); ++k) out.row(k) = sums.segment(k * d, d);
  return out;
}

void GpcEnsemble::validate() const {
  if (order < 0) throw ConfigError("gPC ensemble: negative order");
  if (xhat.rows() < 1 || xhat.cols() < order + 1 || xhat.cols() % (order + 1) != 0)
    throw ConfigError("gPC ensemble: coefficient array has the wrong shape");
  if (xhat.rows() != vhat.rows() || xhat.cols() != vhat.cols())
    throw ConfigError("gPC ensemble: position and velocity coefficients differ in shape");
  if (!xhat.allFinite() || !vhat.allFinite()) throw ConfigError("gPC ensemble: non-finite coefficients");
}

GpcCoupling::GpcCoupling(const KernelSpec& kernel, const GpcBasis& basis, const Quadrature& quad)
    : spec(kernel), order(basis.order), thetas(quad.nodes), weights(quad.weights) {
  phi.resize(quad.size(), basis.order + 1);
  for (int q = 0; q < quad.size(); ++q) phi.row(q) = basis.evaluate(quad.nodes[q]).transpose();
}

void GpcCoupling::pair_coeffs(const double* xi, const double* xj, int d, Eigen::MatrixXd& e) const {
  const int m = order + 1;
  e.resize(m, m);
  if (order == 0 && !spec.stochastic()) {
    // psi is theta-free and the positions have no random modes: e = psi(r).
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double diff = xj[c] - xi[c];
      r2 += diff * diff;
    }
    e(0, 0) = spec(std::sqrt(r2));
    return;
  }
  e.setZero();
  for (Eigen::Index q = 0; q < thetas.size(); ++q) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double diff = 0.0;
      for (int k = 0; k < m; ++k) diff += (xj[k * d + c] - xi[k * d + c]) * phi(q, k);
      r2 += diff * diff;
    }
    const double wpsi = weights[q] * spec(std::sqrt(r2), thetas[q]);
    for (int l = 0; l < m; ++l)
      for (int k = l; k < m; ++k) e(l, k) += wpsi * (phi(q, k) * phi(q, l));
  }
  for (int l = 0; l < m; ++l)
    for (int k = 0; k < l; ++k) e(l, k) = e(k, l);
}

Eigen::MatrixXd GpcCoupling::shared_coeffs() const {
  const int m = order + 1;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index q = 0; q < thetas.size(); ++q) {
    const double wpsi = weights[q] * spec(0.0, thetas[q]);
    for (int l = 0; l < m; ++l)
      for (int k = l; k < m; ++k) e(l, k) += wpsi * (phi(q, k) * phi(q, l));
  }
  for (int l = 0; l < m; ++l)
    for (int k = 0; k < l; ++k) e(l, k) = e(k, l);
  return e;
}

Eigen::MatrixXd pair_coeffs(const Eigen::MatrixXd& xi, const Eigen::MatrixXd& xj, const KernelSpec& spec,
                            const GpcBasis& basis, const Quadrature& quad) {
  if (xi.rows() != basis.order + 1 || xj.rows() != xi.rows() || xj.cols() != xi.cols())
    throw UsageError("pair_coeffs: coefficient arrays must both be (K+1) x d");
  const int d = static_cast<int>(xi.cols());
  // Row-major copies: mode-major, axis fastest.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = xi, b = xj;
  GpcCoupling coupling(spec, basis, quad);
  Eigen::MatrixXd e;
  coupling.pair_coeffs(a.data(), b.data(), d, e);
  return e;
}

void gpc_batch_rhs(const GpcCoupling& coupling, int p, int d, const double* y, double* dy,
                   const std::vector<Eigen::MatrixXd>* frozen) {
  const int m = coupling.order + 1;
  const std::size_t stride = static_cast<std::size_t>(m) * static_cast<std::size_t>(d);
  const std::size_t half = static_cast<std::size_t>(p) * stride;
  const double* X = y;
  const double* V = y + half;
  std::copy(V, V + half, dy);
  const double prefactor = coupling.spec.kappa / static_cast<double>(p - 1);

  if (coupling.spec.distance_independent() && coupling.spec.stochastic()) {
    // One coefficient matrix for every pair: sum_j e (v_j - v_i) = e sum_j (v_j - v_i).
    const Eigen::MatrixXd e = coupling.shared_coeffs();
    std::vector<double> diff(stride);
    for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i) {
      const double* vi = V + i * stride;
      std::fill(diff.begin(), diff.end(), 0.0);
      for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) {
        if (j == i) continue;
        const double* vj = V + j * stride;
        for (std::size_t s = 0; s < stride; ++s) diff[s] += vj[s] - vi[s];
      }
      double* out = dy + half + i * stride;
      for (int l = 0; l < m; ++l)
        for (int c = 0; c < d; ++c) {
          double acc = 0.0;
          for (int k = 0; k < m; ++k) acc += e(l, k) * diff[static_cast<std::size_t>(k * d + c)];
          out[l * d + c] = prefactor * acc;
        }
    }
    return;
  }

  Eigen::MatrixXd e(m, m);
  for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i) {
    const double* xi = X + i * stride;
    const double* vi = V + i * stride;
    double* out = dy + half + i * stride;
    for (std::size_t s = 0; s < stride; ++s) out[s] = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) {
      if (j == i) continue;
      const double* vj = V + j * stride;
      const Eigen::MatrixXd* ep = &e;
      if (frozen)
        ep = &(*frozen)[i * static_cast<std::size_t>(p) + j];
      else
        coupling.pair_coeffs(xi, X + j * stride, d, e);
      for (int l = 0; l < m; ++l)
        for (int c = 0; c < d; ++c) {
          double acc = 0.0;
          for (int k = 0; k < m; ++k) acc += (*ep)(l, k) * (vj[k * d + c] - vi[k * d + c]);
          out[l * d + c] += acc;
        }
    }
    for (std::size_t s = 0; s < stride; ++s) out[s] *= prefactor;
  }
}

GpcEnsemble rbm_gpc_step(const GpcEnsemble& ens, const BatchPlan& plan, const KernelSpec& spec,
                         const GpcBasis& basis, const Quadrature& quad, const StepperSpec& stepper, double tau,
                         CoefficientMode mode) {
  const int n = ens.size();
  const int d = ens.dim();
  const int m = ens.modes();
  if (basis.order != ens.order) throw UsageError("rbm_gpc_step: basis order differs from the ensemble order");
  if (plan.n != n) throw ConfigError("rbm_gpc_step: batch plan does not match the ensemble size");
  const int p = plan.p;
  const std::size_t stride = static_cast<std::size_t>(m) * static_cast<std::size_t>(d);
  const GpcCoupling coupling(spec, basis, quad);

  GpcEnsemble out = ens;
  out.time = ens.time + tau;
  parallel_for(static_cast<std::size_t>(plan.batch_count()), [&](std::size_t q) {
    auto members = plan.batch(static_cast<int>(q));
    Eigen::VectorXd y(static_cast<Eigen::Index>(2 * p * stride));
    const std::size_t half = static_cast<std::size_t>(p) * stride;
    for (std::size_t a = 0; a < static_cast<std::size_t>(p); ++a)
      for (std::size_t s = 0; s < stride; ++s) {
        y[static_cast<Eigen::Index>(a * stride + s)] = ens.xhat(members[a], static_cast<Eigen::Index>(s));
        y[static_cast<Eigen::Index>(half + a * stride + s)] = ens.vhat(members[a], static_cast<Eigen::Index>(s));
      }
    std::vector<Eigen::MatrixXd> frozen;
    if (mode == CoefficientMode::frozen) {
      frozen.resize(static_cast<std::size_t>(p) * static_cast<std::size_t>(p));
      for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i)
        for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j)
          if (i != j) coupling.pair_coeffs(y.data() + i * stride, y.data() + j * stride, d, frozen[i * p + j]);
    }
    Rk4Workspace<double> ws;
    auto rhs = [&](const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
      gpc_batch_rhs(coupling, p, d, s.data(), ds.data(), mode == CoefficientMode::frozen ? &frozen : nullptr);
    };
    advance<double>(rhs, y, tau, stepper, ws, plan.step_index);
    for (std::size_t a = 0; a < static_cast<std::size_t>(p); ++a)
      for (std::size_t s = 0; s < stride; ++s) {
        out.xhat(members[a], static_cast<Eigen::Index>(s)) = y[static_cast<Eigen::Index>(a * stride + s)];
        out.vhat(members[a], static_cast<Eigen::Index>(s)) = y[static_cast<Eigen::Index>(half + a * stride + s)];
      }
  });
  return out;
}

PhaseGrid PhaseGrid::uniform(std::vector<int> axes, double lo, double hi, int cells_per_axis) {
  PhaseGrid g;
  g.lo.assign(axes.size(), lo);
  g.cells.assign(axes.size(), cells_per_axis);
  g.axes = std::move(axes);
  g.h = (hi - lo) / cells_per_axis;
  g.validate();
  return g;
}

PhaseGrid PhaseGrid::full(int dim, double lo, double hi, int cells_per_axis) {
  std::vector<int> axes(static_cast<std::size_t>(2 * dim));
  for (int a = 0; a < 2 * dim; ++a) axes[static_cast<std::size_t>(a)] = a;
  return uniform(std::move(axes), lo, hi, cells_per_axis);
}

std::size_t PhaseGrid::cell_count() const {
  std::size_t n = 1;
  for (int c : cells) n *= static_cast<std::size_t>(c);
  return n;
}

std::vector<double> PhaseGrid::center(std::size_t cell) const {
  std::vector<double> out(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    std::size_t idx = cell % static_cast<std::size_t>(cells[a]);
    cell /= static_cast<std::size_t>(cells[a]);
    out[a] = lo[a] + (static_cast<double>(idx) + 0.5) * h;
  }
  return out;
}

void PhaseGrid::validate() const {
  if (axes.empty()) throw ConfigError("phase grid: no axes");
  if (lo.size() != axes.size() || cells.size() != axes.size())
    throw ConfigError("phase grid: bounds and cell counts must match the axis list");
  if (!(h > 0.0)) throw ConfigError("phase grid: edge length must be positive");
  for (int c : cells)
    if (c < 1) throw ConfigError("phase grid: every axis needs at least one cell");
  for (int a : axes)
    if (a < 0) throw ConfigError("phase grid: negative axis index");
}

bool PhaseGrid::same_as(const PhaseGrid& other) const {
  return axes == other.axes && lo == other.lo && cells == other.cells && h == other.h;
}

namespace {

void accumulate(const Ensemble& ens, const PhaseGrid& grid, Eigen::VectorXd& counts, double& outside) {
  const int d = ens.dim();
  const double mass = 1.0 / ens.size();
  for (int i = 0; i < ens.size(); ++i) {
    std::size_t flat = 0;
    bool inside = true;
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const int axis = grid.axes[a];
      const double z = axis < d ? ens.positions(i, axis) : ens.velocities(i, axis - d);
      const double u = std::floor((z - grid.lo[a]) / grid.h);
      if (!(u >= 0.0 && u < grid.cells[a])) {
        inside = false;
        break;
      }
      flat = flat * static_cast<std::size_t>(grid.cells[a]) + static_cast<std::size_t>(u);
    }
    if (inside)
      counts[static_cast<Eigen::Index>(flat)] += mass;
    else
      outside += mass;
  }
}

void check_axes(const PhaseGrid& grid, int dim) {
  grid.validate();
  for (int a : grid.axes)
    if (a >= 2 * dim) throw ConfigError("phase grid: axis index exceeds the phase-space dimension");
}

}  // namespace

Histogram histogram(const Ensemble& ens, const PhaseGrid& grid) {
  check_axes(grid, ens.dim());
  Histogram hist{grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cell_count())), 0.0};
  accumulate(ens, grid, hist.density, hist.out_of_domain_mass);
  hist.density /= grid.cell_volume();
  return hist;
}

Histogram reconstruct_expected_density(const GpcEnsemble& ens, const PhaseGrid& grid, const GpcBasis& basis,
                                       const Quadrature& quad) {
  check_axes(grid, ens.dim());
  const auto cells = static_cast<Eigen::Index>(grid.cell_count());
  std::vector<Eigen::VectorXd> per_node(static_cast<std::size_t>(quad.size()));
  std::vector<double> outside(static_cast<std::size_t>(quad.size()), 0.0);
  parallel_for(static_cast<std::size_t>(quad.size()), [&](std::size_t q) {
    per_node[q] = Eigen::VectorXd::Zero(cells);
    accumulate(ens.evaluate(basis, quad.nodes[static_cast<Eigen::Index>(q)]), grid, per_node[q], outside[q]);
  });
  Histogram hist{grid, Eigen::VectorXd::Zero(cells), 0.0};
  for (std::size_t q = 0; q < per_node.size(); ++q) {
    hist.density += quad.weights[static_cast<Eigen::Index>(q)] * per_node[q];
    hist.out_of_domain_mass += quad.weights[static_cast<Eigen::Index>(q)] * outside[q];
  }
  hist.density /= grid.cell_volume();
  return hist;
}

Histogram gaussian_smooth(const Histogram& hist, double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("smoothing bandwidth must be positive");
  const PhaseGrid& g = hist.grid;
  const int reach = static_cast<int>(std::ceil(4.0 * bandwidth / g.h));
  std::vector<double> taps(static_cast<std::size_t>(2 * reach + 1));
  double total = 0.0;
  for (int s = -reach; s <= reach; ++s) {
    double z = s * g.h / bandwidth;
    taps[static_cast<std::size_t>(s + reach)] = std::exp(-0.5 * z * z);
    total += taps[static_cast<std::size_t>(s + reach)];
  }
  for (double& t : taps) t /= total;

  Eigen::VectorXd current = hist.density;
  std::size_t inner = g.cell_count();
  for (std::size_t a = 0; a < g.axes.size(); ++a) {
    const auto n_a = static_cast<std::size_t>(g.cells[a]);
    inner /= n_a;  // stride of axis a
    Eigen::VectorXd next = Eigen::VectorXd::Zero(current.size());
    for (std::size_t flat = 0; flat < static_cast<std::size_t>(current.size()); ++flat) {
      const auto idx = static_cast<long>((flat / inner) % n_a);
      for (int s = -reach; s <= reach; ++s) {
        long k = idx + s;
        if (k < 0 || k >= static_cast<long>(n_a)) continue;
        next[static_cast<Eigen::Index>(flat)] +=
            taps[static_cast<std::size_t>(s + reach)] *
            current[static_cast<Eigen::Index>(flat) + static_cast<Eigen::Index>(k - idx) * static_cast<Eigen::Index>(inner)];
      }
    }
    current = std::move(next);
  }
  return Histogram{g, current, hist.out_of_domain_mass};
}

}  // namespace csrbm
