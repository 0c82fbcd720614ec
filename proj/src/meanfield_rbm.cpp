#include "csrbm/meanfield_rbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csrbm/errors.hpp"
#include "csrbm/metrics.hpp"
#include "csrbm/parallel.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

SamplePool qinf_step(const SamplePool& pool, int p, const KernelSpec& spec, const StepperSpec& stepper, double tau,
                     std::uint64_t seed, long step_index, CompanionMode mode) {
  if (mode == CompanionMode::whole_pool) {
    SamplePool out = full_step(pool, spec, stepper, tau, step_index);
    return out;
  }
  if (p < 2) throw ConfigError("qinf_step: batch size p must be >= 2");
  const int m = pool.size();
  const int d = pool.dim();
  if (m < p) throw ConfigError("qinf_step: pool of " + std::to_string(m) + " samples is smaller than p");

  SamplePool out = pool;
  out.time = pool.time + tau;
  const std::size_t pd = static_cast<std::size_t>(p) * static_cast<std::size_t>(d);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    auto rng = make_rng(seed, {stream::companions, static_cast<std::uint64_t>(step_index), i});
    std::uniform_int_distribution<int> pick(0, m - 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(2 * pd));
    for (int a = 0; a < p; ++a) {
      const int src = a == 0 ? static_cast<int>(i) : pick(rng);
      for (int c = 0; c < d; ++c) {
        y[a * d + c] = pool.positions(src, c);
        y[static_cast<Eigen::Index>(pd) + a * d + c] = pool.velocities(src, c);
      }
    }
    Rk4Workspace<double> ws;
    auto rhs = [&](const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
      cs_batch_rhs(spec, p, d, {s.data(), static_cast<std::size_t>(s.size())},
                   {ds.data(), static_cast<std::size_t>(ds.size())});
    };
    advance<double>(rhs, y, tau, stepper, ws, step_index);
    for (int c = 0; c < d; ++c) {
      out.positions(static_cast<Eigen::Index>(i), c) = y[c];
      out.velocities(static_cast<Eigen::Index>(i), c) = y[static_cast<Eigen::Index>(pd) + c];
    }
  });
  return out;
}

std::vector<SamplePool> iterate_qinf(const SamplePool& initial, int p, const KernelSpec& spec,
                                     const StepperSpec& stepper, double tau, long steps, std::uint64_t seed) {
  std::vector<SamplePool> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  out.push_back(initial);
  for (long k = 0; k < steps; ++k) {
    out.push_back(qinf_step(out.back(), p, spec, stepper, tau, seed, k));
    out.back().time = static_cast<double>(k + 1) * tau;
  }
  return out;
}

std::vector<SamplePool> meanfield_reference(const MeanfieldReferenceConfig& config) {
  SimulationConfig sim;
  sim.mode = DynamicsMode::full;
  sim.kernel = config.kernel;
  sim.stepper = config.stepper;
  sim.tau = config.dt;
  sim.final_time = config.final_time;
  sim.seed = config.seed;
  sim.validate(config.n_ref);

  SamplePool state = sample_initial(config.initial, config.n_ref, config.dim, config.seed);
  std::vector<long> wanted;
  for (double t : config.snapshot_times) wanted.push_back(std::lround(t / config.dt));
  const long steps = sim.step_count();

  std::vector<SamplePool> snapshots;
  auto maybe_record = [&](long k) {
    if (std::find(wanted.begin(), wanted.end(), k) != wanted.end() && k != steps) snapshots.push_back(state);
  };
  maybe_record(0);
  for (long k = 0; k < steps; ++k) {
    state = full_step(state, config.kernel, config.stepper, config.dt, k);
    state.time = static_cast<double>(k + 1) * config.dt;
    maybe_record(k + 1);
  }
  snapshots.push_back(state);
  return snapshots;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr summarize(const std::vector<double>& values) {
  MeanStderr out;
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.stderr_ = std::sqrt(var / (n - 1.0) / n);
  return out;
}

}  // namespace

Theorem2Result theorem2_scan(const Theorem2Config& config) {
  MeanfieldReferenceConfig ref = config.reference;
  ref.final_time = config.final_time;
  ref.snapshot_times = {0.0};
  const auto snaps = meanfield_reference(ref);
  return theorem2_scan(config, snaps.front(), snaps.back());
}

Theorem2Result theorem2_scan(const Theorem2Config& config, const SamplePool& reference_initial,
                             const SamplePool& reference_final) {
  if (config.taus.empty()) throw ConfigError("theorem2_scan: empty tau list");
  if (config.replicates < 2) throw ConfigError("theorem2_scan: need at least two replicates");
  if (config.subsample_replicates < 1) throw ConfigError("theorem2_scan: need at least one subsample");
  const int n_ref = reference_final.size();
  const int m = config.pool_size;
  if (reference_initial.size() != n_ref) throw ConfigError("theorem2_scan: reference pools differ in size");
  if (n_ref < 2 * m) throw ConfigError("theorem2_scan: reference must hold at least 2 pool_size samples");
  const int cap = std::min(config.assignment_cap, m);
  const MeanfieldReferenceConfig& ref = config.reference;
  const Eigen::MatrixXd ref_points = phase_points(reference_final);

  auto shuffled = [](int n, std::uint64_t s) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(s, {stream::subsample});
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
  };
  auto w2sq = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double w = wasserstein_assignment(a, b, 2.0, static_cast<int>(a.rows()));
    return w * w;
  };

  struct Sample {
    double d = 0.0;
    double floor = 0.0;
  };

  Theorem2Result result;
  std::vector<double> floors;
  std::vector<double> fit_tau, fit_gap;
  for (std::size_t t = 0; t < config.taus.size(); ++t) {
    const double tau = config.taus[t];
    const long steps = std::lround(config.final_time / tau);
    const std::size_t n_samples =
        static_cast<std::size_t>(config.replicates) * static_cast<std::size_t>(config.subsample_replicates);
    std::vector<Sample> samples(n_samples);
    for (int r = 0; r < config.replicates; ++r) {
      const std::uint64_t s = derive_seed(config.seed, {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(r)});
      const std::vector<int> split = shuffled(n_ref, s);
      std::vector<int> ia(split.begin(), split.begin() + m), ib(split.begin() + m, split.begin() + 2 * m);
      std::sort(ia.begin(), ia.end());
      std::sort(ib.begin(), ib.end());
      auto iterate = [&](const std::vector<int>& rows, std::uint64_t companion_seed) {
        SamplePool pool(reference_initial.positions(rows, Eigen::all), reference_initial.velocities(rows, Eigen::all));
        for (long k = 0; k < steps; ++k)
          pool = qinf_step(pool, config.batch_size, ref.kernel, ref.stepper, tau, companion_seed, k);
        return phase_points(pool);
      };
      const Eigen::MatrixXd pa = iterate(ia, derive_seed(s, {stream::companions, 0}));
      const Eigen::MatrixXd pb = iterate(ib, derive_seed(s, {stream::companions, 1}));
      const Eigen::MatrixXd ra = ref_points(ia, Eigen::all);
      const Eigen::MatrixXd rb = ref_points(ib, Eigen::all);
      parallel_for(static_cast<std::size_t>(config.subsample_replicates), [&](std::size_t j) {
        std::vector<int> rows = shuffled(m, derive_seed(s, {stream::replicate, j}));
        rows.resize(static_cast<std::size_t>(cap));
        std::sort(rows.begin(), rows.end());
        const Eigen::MatrixXd sp = pa(rows, Eigen::all), spp = pb(rows, Eigen::all);
        const Eigen::MatrixXd sa = ra(rows, Eigen::all), sb = rb(rows, Eigen::all);
        const double ab = w2sq(sa, sb);
        Sample& out = samples[static_cast<std::size_t>(r) * config.subsample_replicates + j];
        out.d = 0.5 * (w2sq(sp, sb) + w2sq(sa, spp)) - 0.5 * (w2sq(sp, spp) + ab);
        out.floor = std::sqrt(ab);
      });
    }
    std::vector<double> d_values;
    for (const Sample& x : samples) {
      d_values.push_back(x.d);
      floors.push_back(x.floor);
    }
    const auto st = summarize(d_values);
    Theorem2Row row;
    row.tau = tau;
    row.w2_sq = st.mean;
    row.w2_sq_stderr = st.stderr_;
    row.w2_gap = std::sqrt(std::max(st.mean, 0.0));
    row.w2_stderr = row.w2_gap > 0.0 ? st.stderr_ / (2.0 * row.w2_gap) : std::sqrt(st.stderr_);
    row.n_replicates = static_cast<int>(n_samples);
    row.above_floor = st.mean > 3.0 * st.stderr_;
    if (row.above_floor) {
      fit_tau.push_back(tau);
      fit_gap.push_back(row.w2_gap);
    }
    result.rows.push_back(row);
  }
  const auto fl = summarize(floors);
  result.floor = fl.mean;
  result.floor_stderr = fl.stderr_;
  result.fitted_points = static_cast<int>(fit_tau.size());
  result.slope = loglog_slope(fit_tau, fit_gap);
  return result;
}

}  // namespace csrbm
