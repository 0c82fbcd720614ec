#include "csrbm/kinetic_reference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "csrbm/errors.hpp"

namespace csrbm {

VelocityGrid VelocityGrid::make(double v_min, double v_max, double dv) {
  VelocityGrid g;
  g.v_min = v_min;
  g.v_max = v_max;
  g.dv = dv;
  g.n_cells = static_cast<int>(std::lround((v_max - v_min) / dv));
  g.validate();
  return g;
}

Eigen::VectorXd VelocityGrid::centers() const {
  Eigen::VectorXd c(n_cells);
  for (int j = 0; j < n_cells; ++j) c[j] = center(j);
  return c;
}

void VelocityGrid::validate() const {
  if (!(dv > 0.0) || !(v_max > v_min)) throw ConfigError("velocity grid: need dv > 0 and v_max > v_min");
  if (n_cells < 3) throw ConfigError("velocity grid: need at least three cells");
  if (std::abs(n_cells * dv - (v_max - v_min)) > 1e-9 * (v_max - v_min))
    throw ConfigError("velocity grid: dv must tile [v_min, v_max] exactly");
}

Eigen::MatrixXd assemble_H(const std::function<double(double)>& rate, const GpcBasis& basis,
                           const Quadrature& quad) {
  const int m = basis.order + 1;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  for (int q = 0; q < quad.size(); ++q) {
    Eigen::VectorXd phi = basis.evaluate(quad.nodes[q]);
    const double w = quad.weights[q] * rate(quad.nodes[q]);
    for (int h = 0; h < m; ++h)
      for (int k = h; k < m; ++k) H(h, k) += w * (phi[h] * phi[k]);
  }
  for (int h = 0; h < m; ++h)
    for (int k = 0; k < h; ++k) H(h, k) = H(k, h);
  return H;
}

namespace {

double mass_of(const Eigen::VectorXd& f0, double dv) { return f0.sum() * dv; }

double mean_of(const Eigen::VectorXd& f0, const Eigen::VectorXd& v, double dv) {
  return f0.dot(v) * dv / mass_of(f0, dv);
}

}  // namespace

double zeroth_mode_mean(const GpcDensity& density, const VelocityGrid& grid) {
  return mean_of(density.coeffs.row(0).transpose(), grid.centers(), grid.dv);
}

double expected_temperature(const GpcDensity& density, const VelocityGrid& grid) {
  const Eigen::VectorXd v = grid.centers();
  const Eigen::VectorXd f0 = density.coeffs.row(0).transpose();
  const double u = mean_of(f0, v, grid.dv);
  return f0.dot((v.array() - u).square().matrix()) * grid.dv;
}

double expected_temperature(const GpcEnsemble& ens, const GpcBasis& basis, const Quadrature& quad) {
  if (ens.size() < 1) throw UsageError("expected_temperature: empty ensemble");
  double total = 0.0;
  for (int q = 0; q < quad.size(); ++q) {
    Ensemble at = ens.evaluate(basis, quad.nodes[q]);
    Eigen::RowVectorXd mean = at.velocities.colwise().mean();
    total += quad.weights[q] * (at.velocities.rowwise() - mean).squaredNorm() / at.size();
  }
  return total;
}

Eigen::VectorXd bimodal_density(const VelocityGrid& grid, double mu, double sigma2) {
  Eigen::VectorXd f(grid.n_cells);
  for (int j = 0; j < grid.n_cells; ++j) {
    const double v = grid.center(j);
    f[j] = std::exp(-(v - mu) * (v - mu) / (2.0 * sigma2)) + std::exp(-(v + mu) * (v + mu) / (2.0 * sigma2));
  }
  return f / mass_of(f, grid.dv);
}

FgpcTrajectory fgpc_solve(const VelocityGrid& grid, const Eigen::MatrixXd& H, const Eigen::VectorXd& f0, double dt,
                          double final_time, int record_every) {
  grid.validate();
  const int m = static_cast<int>(H.rows());
  const int n = grid.n_cells;
  if (H.cols() != m || m < 1) throw UsageError("fgpc_solve: H must be square");
  if (f0.size() != n) throw UsageError("fgpc_solve: initial density does not match the grid");
  if (!(dt > 0.0)) throw ConfigError("fgpc_solve: dt must be positive");

  const Eigen::VectorXd v = grid.centers();
  Eigen::VectorXd faces(n + 1);
  for (int j = 0; j <= n; ++j) faces[j] = grid.v_min + j * grid.dv;

  const double u0 = mean_of(f0, v, grid.dv);
  const double speed = std::max(std::abs(grid.v_min - u0), std::abs(grid.v_max - u0));
  const double h_norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().cwiseAbs().maxCoeff();
  const double cfl = speed * h_norm * dt / grid.dv;
  if (cfl > kRk4CentralCfl) {
    std::ostringstream os;
    os << "fgpc_solve: CFL number " << cfl << " exceeds the RK4 central-difference limit " << kRk4CentralCfl;
    throw NumericalError(os.str());
  }

  // Row h of the state is the chaos mode f_h.
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m, n);
  f.row(0) = f0.transpose();

  auto rhs = [&](const Eigen::MatrixXd& s, Eigen::MatrixXd& ds) {
    const Eigen::VectorXd s0 = s.row(0).transpose();
    const double u = mean_of(s0, v, grid.dv);
    // Mode-mixed field g_h = sum_k H_hk f_k; flux at interior faces is
    // (v_face - u) times the face average of g.
    const Eigen::MatrixXd g = H * s;
    ds.setZero(m, n);
    for (int j = 0; j + 1 < n; ++j) {
      const double a = faces[j + 1] - u;
      for (int h = 0; h < m; ++h) {
        const double flux = a * 0.5 * (g(h, j) + g(h, j + 1));
        ds(h, j) += flux / grid.dv;
        ds(h, j + 1) -= flux / grid.dv;
      }
    }
  };

  FgpcTrajectory traj;
  auto record = [&](double t) {
    GpcDensity dens{f, t};
    const Eigen::VectorXd s0 = f.row(0).transpose();
    traj.times.push_back(t);
    traj.temperature.push_back(expected_temperature(dens, grid));
    traj.mass.push_back(mass_of(s0, grid.dv));
    traj.momentum.push_back(s0.dot(v) * grid.dv);
  };

  const long steps = std::lround(final_time / dt);
  Eigen::MatrixXd k1, k2, k3, k4;
  record(0.0);
  for (long s = 0; s < steps; ++s) {
    rhs(f, k1);
    rhs(f + 0.5 * dt * k1, k2);
    rhs(f + 0.5 * dt * k2, k3);
    rhs(f + dt * k3, k4);
    f += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!f.allFinite()) {
      std::ostringstream os;
      os << "fgpc_solve: non-finite density at step " << s;
      throw NumericalError(os.str());
    }
    if ((s + 1) % record_every == 0 || s + 1 == steps) record(static_cast<double>(s + 1) * dt);
  }
  traj.final = GpcDensity{f, static_cast<double>(steps) * dt};
  return traj;
}

}  // namespace csrbm
