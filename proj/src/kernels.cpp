#include "csrbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csrbm/errors.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::constant: return "constant";
    case KernelFamily::inverse_power: return "inverse-power";
    case KernelFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "constant") return KernelFamily::constant;
  if (name == "inverse-power" || name == "inverse_power") return KernelFamily::inverse_power;
  if (name == "tabulated") return KernelFamily::tabulated;
  throw ConfigError("unknown kernel family '" + name + "'");
}

std::string to_string(KernelViolation::Kind kind) {
  switch (kind) {
    case KernelViolation::Kind::lower_bound: return "lower_bound";
    case KernelViolation::Kind::upper_bound: return "upper_bound";
    case KernelViolation::Kind::monotonicity: return "monotonicity";
    case KernelViolation::Kind::lipschitz: return "lipschitz";
  }
  return "unknown";
}

KernelSpec KernelSpec::constant(double value, double kappa) {
  KernelSpec k;
  k.family = KernelFamily::constant;
  k.kappa = kappa;
  k.gamma_base = value;
  k.psi0 = value;
  k.psiM = std::max(1.0, value);
  k.lip = 0.0;
  return k;
}

KernelSpec KernelSpec::inverse_power(double gamma, double kappa) {
  return stochastic_inverse_power(gamma, 0.0, kappa);
}

KernelSpec KernelSpec::stochastic_inverse_power(double gamma_base, double gamma_slope, double kappa) {
  KernelSpec k;
  k.family = KernelFamily::inverse_power;
  k.kappa = kappa;
  k.gamma_base = gamma_base;
  k.gamma_slope = gamma_slope;
  // Positive lower bound only exists on a bounded support; callers set psi0
  // for the realized r range.
  k.psi0 = 0.0;
  k.psiM = 1.0;
  k.lip = 1.0;
  return k;
}

KernelSpec KernelSpec::tabulated(std::vector<double> r, std::vector<double> psi, double kappa) {
  KernelSpec k;
  k.family = KernelFamily::tabulated;
  k.kappa = kappa;
  k.knots_r = std::move(r);
  k.knots_psi = std::move(psi);
  if (!k.knots_psi.empty()) {
    auto [lo, hi] = std::minmax_element(k.knots_psi.begin(), k.knots_psi.end());
    k.psi0 = *lo;
    k.psiM = *hi;
  }
  k.lip = 1.0;
  return k;
}

double KernelSpec::operator()(double r, double theta) const {
  switch (family) {
    case KernelFamily::constant:
      return parameter(theta);
    case KernelFamily::inverse_power:
      return std::pow(1.0 + r * r, -parameter(theta));
    case KernelFamily::tabulated: {
      if (r <= knots_r.front()) return knots_psi.front();
      if (r >= knots_r.back()) return knots_psi.back();
      auto it = std::upper_bound(knots_r.begin(), knots_r.end(), r);
      auto hi = static_cast<std::size_t>(it - knots_r.begin());
      std::size_t lo = hi - 1;
      double s = (r - knots_r[lo]) / (knots_r[hi] - knots_r[lo]);
      return knots_psi[lo] + s * (knots_psi[hi] - knots_psi[lo]);
    }
  }
  return 0.0;
}

void KernelSpec::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kernel: kappa must be a finite nonnegative number");
  if (!(psiM > 0.0)) throw ConfigError("kernel: psiM must be positive");
  if (!(psi0 >= 0.0)) throw ConfigError("kernel: psi0 must be nonnegative");
  if (!(lip >= 0.0)) throw ConfigError("kernel: lip must be nonnegative");
  if (family == KernelFamily::tabulated) {
    if (knots_r.size() < 2 || knots_r.size() != knots_psi.size())
      throw ConfigError("kernel: tabulated family needs at least two (r, psi) knots of equal count");
    for (std::size_t i = 1; i < knots_r.size(); ++i)
      if (!(knots_r[i] > knots_r[i - 1])) throw ConfigError("kernel: tabulated knots must be strictly increasing in r");
    if (knots_r.front() < 0.0) throw ConfigError("kernel: tabulated knots must start at r >= 0");
  }
}

double eval_psi(const KernelSpec& spec, double r, std::optional<double> theta) {
  if (!(r >= 0.0)) {
    std::ostringstream os;
    os << "eval_psi: distance must be nonnegative, got " << r;
    throw DomainError(os.str());
  }
  if (spec.stochastic() && !theta) throw UsageError("eval_psi: stochastic kernel evaluated without theta");
  return spec(r, spec.stochastic() ? *theta : 0.0);
}

KernelReport validate_kernel(const KernelSpec& spec, int n_samples, double r_max, std::uint64_t rng_seed,
                             ThetaRange thetas) {
  KernelReport report;
  report.n_samples = std::max(n_samples, 2);
  report.r_max = r_max;

  auto rng = make_rng(rng_seed, {stream::kernel_check});
  std::uniform_real_distribution<double> r_dist(0.0, r_max);
  std::uniform_real_distribution<double> t_dist(thetas.lo, thetas.hi);

  std::vector<double> rs(static_cast<std::size_t>(report.n_samples));
  rs.front() = 0.0;
  rs.back() = r_max;
  for (std::size_t i = 1; i + 1 < rs.size(); ++i) rs[i] = r_dist(rng);
  std::sort(rs.begin(), rs.end());

  std::vector<double> theta_samples{0.0};
  if (spec.stochastic()) theta_samples = {thetas.lo, 0.5 * (thetas.lo + thetas.hi), thetas.hi, t_dist(rng), t_dist(rng)};

  for (double theta : theta_samples) {
    std::vector<double> values(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      values[i] = spec(rs[i], theta);
      if (values[i] < spec.psi0)
        report.violations.push_back({KernelViolation::Kind::lower_bound, rs[i], rs[i], theta, values[i]});
      if (values[i] > spec.psiM)
        report.violations.push_back({KernelViolation::Kind::upper_bound, rs[i], rs[i], theta, values[i]});
    }
    // Adjacent sorted pairs plus a handful of random far pairs.
    auto check_pair = [&](std::size_t a, std::size_t b) {
      double dr = rs[a] - rs[b];
      double dpsi = values[a] - values[b];
      if (dpsi * dr > 0.0) report.violations.push_back({KernelViolation::Kind::monotonicity, rs[a], rs[b], theta, dpsi});
      if (std::abs(dpsi) > spec.lip * std::abs(dr) * (1.0 + 1e-12) + 1e-15)
        report.violations.push_back(
            {KernelViolation::Kind::lipschitz, rs[a], rs[b], theta, dr != 0.0 ? std::abs(dpsi / dr) : dpsi});
    };
    for (std::size_t i = 1; i < rs.size(); ++i) check_pair(i - 1, i);
    std::uniform_int_distribution<std::size_t> pick(0, rs.size() - 1);
    for (int t = 0; t < report.n_samples; ++t) check_pair(pick(rng), pick(rng));
  }
  return report;
}

}  // namespace csrbm
