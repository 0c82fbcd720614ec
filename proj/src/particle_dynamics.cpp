#include "csrbm/particle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csrbm/errors.hpp"
#include "csrbm/parallel.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

std::string to_string(Scheme scheme) { return scheme == Scheme::rk4 ? "rk4" : "euler"; }

Scheme scheme_from_string(const std::string& name) {
  if (name == "rk4") return Scheme::rk4;
  if (name == "euler") return Scheme::euler;
  throw ConfigError("unknown integration scheme '" + name + "'");
}

void Ensemble::validate() const {
  if (positions.rows() < 1 || positions.cols() < 1) throw ConfigError("ensemble: need n >= 1 and dim >= 1");
  if (positions.rows() != velocities.rows() || positions.cols() != velocities.cols())
    throw ConfigError("ensemble: positions and velocities differ in shape");
  if (!positions.allFinite() || !velocities.allFinite()) throw ConfigError("ensemble: non-finite entries");
}

BatchPlan BatchPlan::single(int n, long step_index) {
  BatchPlan plan;
  plan.n = n;
  plan.p = n;
  plan.step_index = step_index;
  plan.members.resize(static_cast<std::size_t>(n));
  std::iota(plan.members.begin(), plan.members.end(), 0);
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  return plan;
}

BatchPlan sample_batch_plan(int n, int p, long step_index, std::uint64_t seed) {
  if (p < 2) throw ConfigError("batch size p must be >= 2");
  if (n < p || n % p != 0) {
    std::ostringstream os;
    os << "batch size p = " << p << " must divide N = " << n;
    throw ConfigError(os.str());
  }
  BatchPlan plan;
  plan.n = n;
  plan.p = p;
  plan.step_index = step_index;
  plan.members.resize(static_cast<std::size_t>(n));
  std::iota(plan.members.begin(), plan.members.end(), 0);

  auto rng = make_rng(seed, {stream::batch_plan, static_cast<std::uint64_t>(step_index)});
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(plan.members[static_cast<std::size_t>(i)], plan.members[static_cast<std::size_t>(pick(rng))]);
  }
  plan.assignment.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < n / p; ++q) {
    auto first = plan.members.begin() + static_cast<std::ptrdiff_t>(q) * p;
    std::sort(first, first + p);
    for (auto it = first; it != first + p; ++it) plan.assignment[static_cast<std::size_t>(*it)] = q;
  }
  return plan;
}

void cs_batch_rhs(const KernelSpec& spec, int p, int d, std::span<const double> y, std::span<double> dy,
                  int workers) {
  const std::size_t pd = static_cast<std::size_t>(p) * static_cast<std::size_t>(d);
  const double* X = y.data();
  const double* V = y.data() + pd;
  std::copy(V, V + pd, dy.data());
  const double prefactor = spec.kappa / static_cast<double>(p - 1);

  auto row = [&](std::size_t i) {
    const double* xi = X + i * static_cast<std::size_t>(d);
    const double* vi = V + i * static_cast<std::size_t>(d);
    double* out = dy.data() + pd + i * static_cast<std::size_t>(d);
    for (int c = 0; c < d; ++c) out[c] = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) {
      if (j == i) continue;
      const double* xj = X + j * static_cast<std::size_t>(d);
      const double* vj = V + j * static_cast<std::size_t>(d);
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        double diff = xj[c] - xi[c];
        r2 += diff * diff;
      }
      const double w = spec(std::sqrt(r2));
      for (int c = 0; c < d; ++c) out[c] += w * (vj[c] - vi[c]);
    }
    for (int c = 0; c < d; ++c) out[c] *= prefactor;
  };
  if (workers > 1 && p >= 256)
    parallel_for(static_cast<std::size_t>(p), row, workers);
  else
    for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i) row(i);
}

CsDerivative cs_rhs(const Ensemble& ens, const KernelSpec& spec) {
  const int n = ens.size();
  const int d = ens.dim();
  if (n < 2) throw DomainError("cs_rhs: the interacting system needs N >= 2 particles");
  Eigen::VectorXd y(2 * n * d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      y[i * d + c] = ens.positions(i, c);
      y[n * d + i * d + c] = ens.velocities(i, c);
    }
  Eigen::VectorXd dy(y.size());
  cs_batch_rhs(spec, n, d, {y.data(), static_cast<std::size_t>(y.size())},
               {dy.data(), static_cast<std::size_t>(dy.size())}, default_workers());
  CsDerivative out{Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, d)};
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      out.dx(i, c) = dy[i * d + c];
      out.dv(i, c) = dy[n * d + i * d + c];
    }
  return out;
}

Ensemble rbm_step(const Ensemble& ens, const BatchPlan& plan, const KernelSpec& spec, const StepperSpec& stepper,
                  double tau) {
  const int n = ens.size();
  const int d = ens.dim();
  if (plan.n != n) throw ConfigError("rbm_step: batch plan does not match the ensemble size");
  if (plan.p < 2) throw DomainError("rbm_step: batches need at least two particles");
  Ensemble out = ens;
  out.time = ens.time + tau;
  const int p = plan.p;
  const int batches = plan.batch_count();
  const int row_workers = batches == 1 ? default_workers() : 1;

  parallel_for(static_cast<std::size_t>(batches), [&](std::size_t q) {
    auto members = plan.batch(static_cast<int>(q));
    Eigen::VectorXd y(2 * p * d);
    for (int a = 0; a < p; ++a)
      for (int c = 0; c < d; ++c) {
        y[a * d + c] = ens.positions(members[static_cast<std::size_t>(a)], c);
        y[p * d + a * d + c] = ens.velocities(members[static_cast<std::size_t>(a)], c);
      }
    Rk4Workspace<double> ws;
    auto rhs = [&](const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
      cs_batch_rhs(spec, p, d, {s.data(), static_cast<std::size_t>(s.size())},
                   {ds.data(), static_cast<std::size_t>(ds.size())}, row_workers);
    };
    advance<double>(rhs, y, tau, stepper, ws, plan.step_index);
    for (int a = 0; a < p; ++a)
      for (int c = 0; c < d; ++c) {
        out.positions(members[static_cast<std::size_t>(a)], c) = y[a * d + c];
        out.velocities(members[static_cast<std::size_t>(a)], c) = y[p * d + a * d + c];
      }
  }, batches == 1 ? 1 : default_workers());
  return out;
}

Ensemble full_step(const Ensemble& ens, const KernelSpec& spec, const StepperSpec& stepper, double tau,
                   long step_index) {
  return rbm_step(ens, BatchPlan::single(ens.size(), step_index), spec, stepper, tau);
}

double diameter(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) best = std::max(best, (points.row(i) - points.row(j)).squaredNorm());
  return std::sqrt(best);
}

Diagnostics diagnostics(const Ensemble& ens, int exact_limit, std::uint64_t seed) {
  Diagnostics diag;
  diag.momentum = ens.velocities.colwise().sum().transpose();
  diag.kinetic_energy = ens.velocities.squaredNorm();
  if (ens.size() <= exact_limit) {
    diag.diam_x = diameter(ens.positions);
    diag.diam_v = diameter(ens.velocities);
    return diag;
  }
  std::vector<int> idx(static_cast<std::size_t>(ens.size()));
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed, {stream::subsample, static_cast<std::uint64_t>(ens.size())});
  for (int i = 0; i < exact_limit; ++i) {
    std::uniform_int_distribution<int> pick(i, ens.size() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(exact_limit));
  diag.diam_x = diameter(ens.positions(idx, Eigen::all));
  diag.diam_v = diameter(ens.velocities(idx, Eigen::all));
  diag.approximate = true;
  return diag;
}

Eigen::MatrixXd batch_momenta(const Ensemble& ens, const BatchPlan& plan) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(plan.batch_count(), ens.dim());
  for (int q = 0; q < plan.batch_count(); ++q)
    for (int member : plan.batch(q)) out.row(q) += ens.velocities.row(member);
  return out;
}

std::string to_string(DynamicsMode mode) { return mode == DynamicsMode::full ? "full" : "rbm"; }

DynamicsMode dynamics_mode_from_string(const std::string& name) {
  if (name == "full") return DynamicsMode::full;
  if (name == "rbm") return DynamicsMode::rbm;
  throw ConfigError("unknown dynamics mode '" + name + "'");
}

long SimulationConfig::step_count() const { return std::lround(final_time / tau); }

void SimulationConfig::validate(int n) const {
  kernel.validate();
  stepper.validate();
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(final_time >= 0.0)) throw ConfigError("final time must be nonnegative");
  if (std::abs(static_cast<double>(step_count()) * tau - final_time) > 1e-9 * std::max(1.0, final_time))
    throw ConfigError("final time must be an integer multiple of tau");
  if (n < 2) throw ConfigError("the interacting system needs N >= 2 particles");
  if (mode == DynamicsMode::rbm) {
    if (batch_size < 2) throw ConfigError("batch size p must be >= 2");
    if (n % batch_size != 0) {
      std::ostringstream os;
      os << "batch size p = " << batch_size << " must divide N = " << n;
      throw ConfigError(os.str());
    }
  }
}

namespace {

std::vector<long> snapshot_steps(const std::vector<double>& times, double tau) {
  std::vector<long> steps;
  for (double t : times) steps.push_back(std::lround(t / tau));
  return steps;
}

}  // namespace

Trajectory simulate(const Ensemble& initial, const SimulationConfig& config) {
  initial.validate();
  config.validate(initial.size());
  const long steps = config.step_count();
  const auto snaps = snapshot_steps(config.snapshot_times, config.tau);

  Trajectory traj;
  Ensemble state = initial;
  state.time = 0.0;
  auto record = [&](long k) {
    traj.times.push_back(state.time);
    traj.diagnostics.push_back(diagnostics(state, kExactDiameterLimit, config.seed));
    if (std::find(snaps.begin(), snaps.end(), k) != snaps.end()) traj.snapshots.push_back(state);
  };
  record(0);
  for (long k = 0; k < steps; ++k) {
    if (config.mode == DynamicsMode::rbm) {
      auto plan = sample_batch_plan(state.size(), config.batch_size, k, config.seed);
      state = rbm_step(state, plan, config.kernel, config.stepper, config.tau);
    } else {
      state = full_step(state, config.kernel, config.stepper, config.tau, k);
    }
    // Accumulating tau drifts; keep time on the grid.
    state.time = static_cast<double>(k + 1) * config.tau;
    record(k + 1);
  }
  traj.final_state = state;
  return traj;
}

}  // namespace csrbm
