#include "csrbm/experiments.hpp"

#include <cmath>
#include <numeric>

#include "csrbm/csv_io.hpp"
#include "csrbm/errors.hpp"
#include "csrbm/metrics.hpp"
#include "csrbm/parallel.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Extra stream tags for the scan drivers.
constexpr std::uint64_t kAnchorTag = 0xa0c4;
constexpr std::uint64_t kReferenceTag = 0x4ef;

void prepare(const ScenarioConfig& cfg, const fs::path& dir) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(cfg));
}

std::uint64_t seed_of(const ScenarioConfig& cfg) {
  if (!cfg.seed) throw ConfigError("a seed is required for experiment runs");
  return *cfg.seed;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  if (v.empty()) return out;
  const auto n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return out;
  double var = 0.0;
  for (double x : v) var += (x - out.mean) * (x - out.mean);
  out.stderr_ = std::sqrt(var / (n - 1.0) / n);
  return out;
}

// Step lengths covering [0, T]: whole steps of dt and a shorter last one.
std::vector<double> step_lengths(double final_time, double dt) {
  const auto whole = static_cast<long>(std::floor(final_time / dt + 1e-9));
  std::vector<double> h(static_cast<std::size_t>(whole), dt);
  const double rest = final_time - static_cast<double>(whole) * dt;
  if (rest > 1e-9 * dt) h.push_back(rest);
  return h;
}

void require_homogeneous(const ScenarioConfig& cfg) {
  if (cfg.dim != 1 || cfg.initial.family != InitialFamily::bimodal1d_v)
    throw ConfigError("the homogeneous problem needs dim 1 and the bimodal1d_v initial family");
  if (cfg.kernel.family != KernelFamily::constant)
    throw ConfigError("the homogeneous problem needs the constant kernel family");
}

PhaseGrid velocity_grid(const ScenarioConfig& cfg) {
  return PhaseGrid::uniform({cfg.dim}, cfg.grid.lo, cfg.grid.hi, cfg.grid.cells);
}

void write_scan(const fs::path& path, const std::vector<ScanRow>& rows, bool with_tv) {
  std::vector<std::string> header{"N", "p", "dt", "n_replicates", "mse_T", "mse_stderr"};
  if (with_tv) header.insert(header.end(), {"err_tv", "err_tv_stderr"});
  CsvWriter w(path, header);
  for (const ScanRow& r : rows) {
    std::vector<CsvCell> row{static_cast<long long>(r.n), static_cast<long long>(r.p), r.dt,
                             static_cast<long long>(r.replicates), r.mse, r.mse_stderr};
    if (with_tv) row.insert(row.end(), {r.err_tv, r.err_tv_stderr});
    w.row(row);
  }
}

// Squared errors of run temperatures against per-replicate references.
ScanRow mse_row(int n, int p, double dt, const std::vector<double>& runs, const std::vector<double>& refs) {
  std::vector<double> sq(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) sq[r] = (runs[r] - refs[r]) * (runs[r] - refs[r]);
  const auto s = mean_stderr(sq);
  ScanRow row;
  row.n = n;
  row.p = p;
  row.dt = dt;
  row.replicates = static_cast<int>(runs.size());
  row.mse = s.mean;
  row.mse_stderr = s.stderr_;
  return row;
}

}  // namespace

HomogeneousRun homogeneous_replicate(const ScenarioConfig& cfg, int n, int p, double dt, std::uint64_t initial_seed,
                                     std::uint64_t batch_seed, const PhaseGrid* grid) {
  const GpcBasis basis = build_basis(cfg.param, cfg.order);
  const Quadrature quad = quadrature(cfg.param, cfg.resolved_quadrature_order());
  GpcEnsemble g = GpcEnsemble::from_ensemble(sample_initial(cfg.initial, n, cfg.dim, initial_seed), cfg.order);

  const std::vector<double> steps = step_lengths(cfg.final_time, dt);
  HomogeneousRun run;
  run.times.push_back(0.0);
  run.temperature.push_back(expected_temperature(g, basis, quad));
  // Snapshot i is taken after snap_steps[i] steps (nearest step, clamped).
  std::vector<long> snap_steps;
  for (double t : cfg.snapshot_times)
    snap_steps.push_back(std::min<long>(std::lround(t / dt), static_cast<long>(steps.size())));
  if (grid) run.snapshots.resize(snap_steps.size());
  auto snapshot = [&](long k) {
    if (!grid) return;
    for (std::size_t i = 0; i < snap_steps.size(); ++i)
      if (snap_steps[i] == k) run.snapshots[i] = reconstruct_expected_density(g, *grid, basis, quad);
  };
  snapshot(0);
  double t = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const BatchPlan plan = sample_batch_plan(n, p, static_cast<long>(k), batch_seed);
    g = rbm_gpc_step(g, plan, cfg.kernel, basis, quad, cfg.stepper, steps[k]);
    t += steps[k];
    g.time = t;
    run.times.push_back(t);
    run.temperature.push_back(expected_temperature(g, basis, quad));
    snapshot(static_cast<long>(k + 1));
  }
  if (grid) run.final_density = reconstruct_expected_density(g, *grid, basis, quad);
  return run;
}

KineticReference homogeneous_kinetic_reference(const ScenarioConfig& cfg) {
  require_homogeneous(cfg);
  KineticReference ref;
  ref.grid = VelocityGrid::make(cfg.grid.lo, cfg.grid.hi, cfg.grid.dv);
  const GpcBasis basis = build_basis(cfg.param, cfg.order);
  const Quadrature quad = quadrature(cfg.param, cfg.resolved_quadrature_order());
  const KernelSpec& k = cfg.kernel;
  const Eigen::MatrixXd H = assemble_H([&](double theta) { return k.kappa * k.parameter(theta); }, basis, quad);
  const Eigen::VectorXd f0 = bimodal_density(ref.grid, cfg.initial.mu, cfg.initial.sigma2);
  // dt = dv/10 keeps the CFL number well inside the RK4 bound for rates
  // of order one.
  const long n_steps = std::max<long>(1, std::lround(std::ceil(cfg.final_time / (cfg.grid.dv / 10.0) - 1e-9)));
  const double dt = cfg.final_time > 0.0 ? cfg.final_time / static_cast<double>(n_steps) : cfg.grid.dv / 10.0;
  ref.trajectory = fgpc_solve(ref.grid, H, f0, dt, cfg.final_time, static_cast<int>(std::max<long>(1, n_steps / 100)));
  ref.temperature = ref.trajectory.temperature.back();
  return ref;
}

Histogram coarsen_density(const KineticReference& ref, const PhaseGrid& grid) {
  if (grid.axes.size() != 1) throw UsageError("coarsen_density: needs a one-axis grid");
  Histogram out{grid, Eigen::VectorXd::Zero(grid.cells[0]), 0.0};
  const Eigen::RowVectorXd f = ref.trajectory.final.coeffs.row(0);
  for (int j = 0; j < ref.grid.n_cells; ++j) {
    const double mass = f[j] * ref.grid.dv;
    const auto c = static_cast<long>(std::floor((ref.grid.center(j) - grid.lo[0]) / grid.h));
    if (c < 0 || c >= grid.cells[0])
      out.out_of_domain_mass += mass;
    else
      out.density[c] += mass / grid.h;
  }
  return out;
}

HomogeneousResult run_homogeneous(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  require_homogeneous(cfg);
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);

  HomogeneousResult result;
  result.reference = homogeneous_kinetic_reference(cfg);
  const PhaseGrid grid = velocity_grid(cfg);
  const Histogram ref_hist = coarsen_density(result.reference, grid);

  const auto reps = static_cast<std::size_t>(cfg.n_replicates);
  std::vector<HomogeneousRun> runs(reps);
  parallel_for(reps, [&](std::size_t r) {
    runs[r] = homogeneous_replicate(cfg, cfg.n, cfg.p, cfg.tau, derive_seed(seed, {stream::initial, r}),
                                    derive_seed(seed, {stream::batch_plan, r}), &grid);
  });

  std::vector<double> sq, tv;
  for (const HomogeneousRun& run : runs) {
    const double temp = run.temperature.back();
    result.final_temperature.push_back(temp);
    sq.push_back((temp - result.reference.temperature) * (temp - result.reference.temperature));
    tv.push_back(tv_error(run.final_density, ref_hist));
  }
  const auto mse = mean_stderr(sq);
  const auto err = mean_stderr(tv);
  result.mse = mse.mean;
  result.mse_stderr = mse.stderr_;
  result.err_tv = err.mean;
  result.err_tv_stderr = err.stderr_;

  if (dir.empty()) return result;
  {
    CsvWriter w(dir / "temperature.csv", {"replicate", "t", "expected_temperature"});
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t s = 0; s < runs[r].times.size(); ++s)
        w.row({static_cast<long long>(r), runs[r].times[s], runs[r].temperature[s]});
  }
  {
    const FgpcTrajectory& tr = result.reference.trajectory;
    CsvWriter w(dir / "fgpc_trajectory.csv", {"t", "expected_temperature", "zeroth_mode_mass", "momentum"});
    for (std::size_t s = 0; s < tr.times.size(); ++s) w.row({tr.times[s], tr.temperature[s], tr.mass[s], tr.momentum[s]});
    write_density_csv(dir / "fgpc_final_density.csv", result.reference.grid, tr.final);
  }
  // Expected density over replicates at each snapshot time.
  for (std::size_t s = 0; s < cfg.snapshot_times.size(); ++s) {
    Histogram mean{grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cell_count())), 0.0};
    for (const HomogeneousRun& run : runs) {
      mean.density += run.snapshots[s].density / static_cast<double>(reps);
      mean.out_of_domain_mass += run.snapshots[s].out_of_domain_mass / static_cast<double>(reps);
    }
    write_histogram_csv(dir / ("expected_density_" + time_tag(cfg.snapshot_times[s]) + ".csv"), mean, cfg.dim);
  }
  {
    CsvWriter w(dir / "mse.csv", {"T", "n_replicates", "reference_temperature", "mse_T", "mse_stderr", "err_tv",
                                  "err_tv_stderr"});
    w.row({cfg.final_time, static_cast<long long>(reps), result.reference.temperature, result.mse, result.mse_stderr,
           result.err_tv, result.err_tv_stderr});
  }
  return result;
}

CsResult run_cs(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  const int d = cfg.dim;
  const GpcBasis basis = build_basis(cfg.param, cfg.order);
  const Quadrature quad = quadrature(cfg.param, cfg.resolved_quadrature_order());
  GpcEnsemble g =
      GpcEnsemble::from_ensemble(sample_initial(cfg.initial, cfg.n, d, derive_seed(seed, {stream::initial})), cfg.order);

  // Expected-density grids: the full phase space for d = 1, the position and
  // velocity planes for d = 2.
  std::vector<std::pair<std::string, PhaseGrid>> grids;
  if (d == 1) {
    grids.emplace_back("", PhaseGrid::full(1, cfg.grid.lo, cfg.grid.hi, cfg.grid.cells));
  } else if (d == 2) {
    grids.emplace_back("x_", PhaseGrid::uniform({0, 1}, cfg.grid.lo, cfg.grid.hi, cfg.grid.cells));
    grids.emplace_back("v_", PhaseGrid::uniform({2, 3}, cfg.grid.lo, cfg.grid.hi, cfg.grid.cells));
  }
  const long steps = std::lround(cfg.final_time / cfg.tau);
  std::vector<long> snap_steps;
  for (double t : cfg.snapshot_times) snap_steps.push_back(std::lround(t / cfg.tau));

  const int modes = cfg.order + 1;
  std::vector<std::string> header{"t"};
  for (int k = 0; k < modes; ++k)
    for (int c = 0; c < d; ++c) header.push_back("m" + std::to_string(k) + "_" + std::to_string(c + 1));
  header.insert(header.end(), {"diam_x", "diam_v"});
  const bool approximate = cfg.n > kExactDiameterLimit;
  if (approximate) header.push_back("diameters_approximate");
  std::optional<CsvWriter> traj;
  if (!dir.empty()) traj.emplace(dir / "trajectory.csv", header);

  CsResult result;
  result.mode_momentum_initial = g.mode_momenta();
  const std::uint64_t diam_seed = derive_seed(seed, {stream::subsample});
  auto record = [&](long k) {
    const Eigen::MatrixXd m = g.mode_momenta();
    result.max_momentum_drift = std::max(result.max_momentum_drift, (m - result.mode_momentum_initial).cwiseAbs().maxCoeff());
    const Diagnostics diag = diagnostics(g.mode(0), kExactDiameterLimit, diam_seed);
    if (k == 0) {
      result.diam_x0 = diag.diam_x;
      result.diam_v0 = diag.diam_v;
    }
    result.diam_xT = diag.diam_x;
    result.diam_vT = diag.diam_v;
    result.times.push_back(g.time);
    if (traj) {
      std::vector<CsvCell> row{g.time};
      for (int q = 0; q < modes; ++q)
        for (int c = 0; c < d; ++c) row.emplace_back(m(q, c));
      row.insert(row.end(), {diag.diam_x, diag.diam_v});
      if (approximate) row.emplace_back(1LL);
      traj->row(row);
    }
    if (!dir.empty() && std::find(snap_steps.begin(), snap_steps.end(), k) != snap_steps.end())
      for (const auto& [prefix, grid] : grids)
        write_histogram_csv(dir / ("expected_density_" + prefix + time_tag(g.time) + ".csv"),
                            reconstruct_expected_density(g, grid, basis, quad), d);
  };
  record(0);
  for (long k = 0; k < steps; ++k) {
    const BatchPlan plan = sample_batch_plan(cfg.n, cfg.p, k, derive_seed(seed, {stream::batch_plan}));
    g = rbm_gpc_step(g, plan, cfg.kernel, basis, quad, cfg.stepper, cfg.tau);
    g.time = static_cast<double>(k + 1) * cfg.tau;
    record(k + 1);
  }
  if (!dir.empty()) write_gpc_snapshot_csv(dir / "gpc_final.csv", g);
  result.final_state = std::move(g);
  return result;
}

std::vector<ScanRow> run_n_scan(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  require_homogeneous(cfg);
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  const KineticReference ref = homogeneous_kinetic_reference(cfg);
  const PhaseGrid grid = velocity_grid(cfg);
  const Histogram ref_hist = coarsen_density(ref, grid);
  const auto reps = static_cast<std::size_t>(cfg.n_replicates);

  std::vector<ScanRow> rows;
  for (std::size_t s = 0; s < cfg.scans.n_values.size(); ++s) {
    const int n = cfg.scans.n_values[s];
    std::vector<double> temps(reps), tv(reps);
    parallel_for(reps, [&](std::size_t r) {
      const HomogeneousRun run = homogeneous_replicate(cfg, n, cfg.p, cfg.tau, derive_seed(seed, {stream::initial, s, r}),
                                                       derive_seed(seed, {stream::batch_plan, s, r}), &grid);
      temps[r] = run.temperature.back();
      tv[r] = tv_error(run.final_density, ref_hist);
    });
    ScanRow row = mse_row(n, cfg.p, cfg.tau, temps, std::vector<double>(reps, ref.temperature));
    const auto e = mean_stderr(tv);
    row.err_tv = e.mean;
    row.err_tv_stderr = e.stderr_;
    rows.push_back(row);
  }
  if (!dir.empty()) write_scan(dir / "n_scan.csv", rows, true);
  return rows;
}

std::vector<ScanRow> run_p_scan(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  require_homogeneous(cfg);
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  const int n = cfg.scans.scan_n;
  const auto reps = static_cast<std::size_t>(cfg.n_replicates);

  std::vector<double> refs(reps);
  parallel_for(reps, [&](std::size_t r) {
    refs[r] = homogeneous_replicate(cfg, n, n, cfg.tau, derive_seed(seed, {stream::initial, r}),
                                    derive_seed(seed, {kReferenceTag, r}))
                  .temperature.back();
  });
  std::vector<ScanRow> rows;
  for (std::size_t s = 0; s < cfg.scans.p_values.size(); ++s) {
    const int p = cfg.scans.p_values[s];
    std::vector<double> temps(reps);
    parallel_for(reps, [&](std::size_t r) {
      temps[r] = homogeneous_replicate(cfg, n, p, cfg.tau, derive_seed(seed, {stream::initial, r}),
                                       derive_seed(seed, {stream::batch_plan, s, r}))
                     .temperature.back();
    });
    rows.push_back(mse_row(n, p, cfg.tau, temps, refs));
  }
  if (!dir.empty()) write_scan(dir / "p_scan.csv", rows, false);
  return rows;
}

std::vector<ScanRow> run_dt_scan(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  require_homogeneous(cfg);
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  const int n = cfg.scans.scan_n;
  if (n % cfg.p != 0) throw ConfigError("dt_scan: p must divide scan_n");
  const auto reps = static_cast<std::size_t>(cfg.n_replicates);

  std::vector<double> refs(reps);
  parallel_for(reps, [&](std::size_t r) {
    refs[r] = homogeneous_replicate(cfg, n, cfg.p, cfg.scans.anchor_dt, derive_seed(seed, {stream::initial, r}),
                                    derive_seed(seed, {kAnchorTag, r}))
                  .temperature.back();
  });
  std::vector<ScanRow> rows;
  for (std::size_t s = 0; s < cfg.scans.dt_values.size(); ++s) {
    const double dt = cfg.scans.dt_values[s];
    std::vector<double> temps(reps);
    parallel_for(reps, [&](std::size_t r) {
      temps[r] = homogeneous_replicate(cfg, n, cfg.p, dt, derive_seed(seed, {stream::initial, r}),
                                       derive_seed(seed, {stream::batch_plan, s, r}))
                     .temperature.back();
    });
    rows.push_back(mse_row(n, cfg.p, dt, temps, refs));
  }
  if (!dir.empty()) write_scan(dir / "dt_scan.csv", rows, false);
  return rows;
}

EpsilonScan run_epsilon_scan(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  EpsilonScan scan;
  std::vector<double> ns, eps;
  for (std::size_t s = 0; s < cfg.scans.epsilon_n.size(); ++s) {
    const int n = cfg.scans.epsilon_n[s];
    scan.rows.push_back(estimate_epsilon(n, cfg.p, cfg.scans.epsilon_k, cfg.scans.epsilon_trials, derive_seed(seed, {s})));
    if (scan.rows.back().epsilon_hat > 0.0) {
      ns.push_back(n);
      eps.push_back(scan.rows.back().epsilon_hat);
    }
  }
  scan.slope = loglog_slope(ns, eps);
  if (dir.empty()) return scan;
  CsvWriter w(dir / "epsilon.csv", {"N", "p", "k", "trials", "epsilon_hat", "stderr"});
  json warnings = json::array();
  long violations = 0;
  for (const EpsilonEstimate& e : scan.rows) {
    w.row({static_cast<long long>(e.n), static_cast<long long>(e.p), static_cast<long long>(e.k),
           static_cast<long long>(e.trials), e.epsilon_hat, e.stderr_});
    if (e.warning) warnings.push_back(*e.warning);
    violations += e.invariant_violations;
  }
  write_json(dir / "summary.json",
             {{"loglog_slope", scan.slope}, {"invariant_violations", violations}, {"warnings", warnings}});
  return scan;
}

Theorem2Result run_tau_scan(const ScenarioConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  Theorem2Config t2;
  t2.taus = cfg.scans.taus;
  t2.final_time = cfg.final_time;
  t2.pool_size = cfg.scans.pool_size;
  t2.batch_size = cfg.p;
  t2.replicates = cfg.scans.tau_replicates;
  t2.subsample_replicates = cfg.scans.subsample_replicates;
  t2.reference.n_ref = cfg.scans.n_ref;
  t2.reference.initial = cfg.initial;
  t2.reference.dim = cfg.dim;
  t2.reference.kernel = cfg.kernel;
  t2.reference.stepper = cfg.stepper;
  t2.reference.dt = cfg.scans.ref_dt;
  t2.reference.seed = derive_seed(seed, {stream::initial});
  t2.seed = derive_seed(seed, {stream::companions});
  const Theorem2Result res = theorem2_scan(t2);
  if (dir.empty()) return res;
  CsvWriter w(dir / "theorem2.csv", {"tau", "w2_gap", "w2_stderr", "n_replicates"});
  json rows = json::array();
  for (const Theorem2Row& r : res.rows) {
    w.row({r.tau, r.w2_gap, r.w2_stderr, static_cast<long long>(r.n_replicates)});
    rows.push_back({{"tau", r.tau}, {"w2_sq_debiased", r.w2_sq}, {"w2_sq_stderr", r.w2_sq_stderr},
                    {"above_floor", r.above_floor}});
  }
  write_json(dir / "summary.json", {{"loglog_slope", res.slope},
                                    {"fitted_points", res.fitted_points},
                                    {"independent_sample_floor", res.floor},
                                    {"floor_stderr", res.floor_stderr},
                                    {"rows", rows}});
  return res;
}

Trajectory run_particles(const ScenarioConfig& cfg, DynamicsMode mode, double theta, const fs::path& dir) {
  cfg.validate();
  const std::uint64_t seed = seed_of(cfg);
  prepare(cfg, dir);
  SimulationConfig sim;
  sim.mode = mode;
  sim.kernel = cfg.kernel;
  if (sim.kernel.stochastic()) {
    sim.kernel.gamma_base = sim.kernel.parameter(theta);
    sim.kernel.gamma_slope = 0.0;
  }
  sim.stepper = cfg.stepper;
  sim.tau = cfg.tau;
  sim.final_time = cfg.final_time;
  sim.batch_size = cfg.p;
  sim.seed = derive_seed(seed, {stream::batch_plan});
  sim.snapshot_times = cfg.snapshot_times;
  const Trajectory traj = simulate(sample_initial(cfg.initial, cfg.n, cfg.dim, derive_seed(seed, {stream::initial})), sim);
  if (dir.empty()) return traj;
  write_trajectory_csv(dir / "trajectory.csv", traj);
  for (const Ensemble& snap : traj.snapshots) write_snapshot_csv(dir / ("snapshot_" + time_tag(snap.time) + ".csv"), snap);
  return traj;
}

void run_experiment(const ScenarioConfig& cfg, const fs::path& dir) {
  switch (cfg.scenario) {
    case Scenario::homogeneous: run_homogeneous(cfg, dir); break;
    case Scenario::cs1d:
    case Scenario::cs2d: run_cs(cfg, dir); break;
    case Scenario::epsilon_scan: run_epsilon_scan(cfg, dir); break;
    case Scenario::tau_scan: run_tau_scan(cfg, dir); break;
    case Scenario::n_scan: run_n_scan(cfg, dir); break;
    case Scenario::p_scan: run_p_scan(cfg, dir); break;
    case Scenario::dt_scan: run_dt_scan(cfg, dir); break;
  }
}

}  // namespace csrbm
