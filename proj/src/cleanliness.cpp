#include "csrbm/cleanliness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csrbm/errors.hpp"
#include "csrbm/parallel.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

InfluenceLists::InfluenceLists(int n, int p) : n_(n), p_(p) {
  if (n < 1 || p < 1) throw ConfigError("influence lists: need n >= 1 and p >= 1");
  data_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) data_[static_cast<std::size_t>(i)] = i;
  sizes_.assign(static_cast<std::size_t>(n), 1);
  clean_.assign(static_cast<std::size_t>(n), 1);
}

int InfluenceLists::clean_count() const {
  return static_cast<int>(std::count(clean_.begin(), clean_.end(), char{1}));
}

int InfluenceLists::size_invariant_violations() const {
  int bad = 0;
  for (int i = 0; i < n_; ++i) {
    const long long s = sizes_[static_cast<std::size_t>(i)];
    if (s > full_size_ || (s == full_size_) != clean(i)) ++bad;
  }
  return bad;
}

InfluenceLists advance_lists(const InfluenceLists& state, const BatchPlan& plan) {
  if (plan.n != state.n_ || plan.p != state.p_)
    throw ConfigError("advance_lists: batch plan does not match the influence lists");
  InfluenceLists next;
  next.n_ = state.n_;
  next.p_ = state.p_;
  next.k_ = state.k_ + 1;
  next.full_size_ = std::min<long long>(state.full_size_ * state.p_, static_cast<long long>(state.n_) + 1);
  next.capacity_ = std::min<std::size_t>(state.capacity_ * static_cast<std::size_t>(state.p_),
                                         static_cast<std::size_t>(state.n_));
  next.data_.assign(static_cast<std::size_t>(next.n_) * next.capacity_, 0);
  next.sizes_.assign(static_cast<std::size_t>(next.n_), 0);
  next.clean_.assign(static_cast<std::size_t>(next.n_), 0);

  std::vector<int> merged;
  std::vector<int> scratch;
  merged.reserve(next.capacity_);
  scratch.reserve(next.capacity_);
  for (int q = 0; q < plan.batch_count(); ++q) {
    auto members = plan.batch(q);
    bool all_clean = true;
    std::size_t total = 0;
    merged.clear();
    for (int j : members) {
      all_clean = all_clean && state.clean(j);
      auto lj = state.list(j);
      total += lj.size();
      scratch.clear();
      std::set_union(merged.begin(), merged.end(), lj.begin(), lj.end(), std::back_inserter(scratch));
      merged.swap(scratch);
    }
    // Pairwise disjoint iff no element was shared in the union.
    const bool disjoint = merged.size() == total;
    const char is_clean = (all_clean && disjoint) ? 1 : 0;
    for (int i : members) {
      std::copy(merged.begin(), merged.end(), next.data_.begin() + static_cast<std::ptrdiff_t>(i * next.capacity_));
      next.sizes_[static_cast<std::size_t>(i)] = static_cast<int>(merged.size());
      next.clean_[static_cast<std::size_t>(i)] = is_clean;
    }
  }
  return next;
}

EpsilonEstimate estimate_epsilon(int n, int p, int k, long trials, std::uint64_t seed) {
  if (p < 2 || n % p != 0) throw ConfigError("estimate_epsilon: p must be >= 2 and divide N");
  if (k < 0) throw ConfigError("estimate_epsilon: k must be >= 0");
  if (trials < 1) throw ConfigError("estimate_epsilon: need at least one trial");

  EpsilonEstimate est;
  est.n = n;
  est.p = p;
  est.k = k;
  est.trials = trials;
  if (std::pow(static_cast<double>(p), k) > n) {
    std::ostringstream os;
    os << "p^k = " << p << "^" << k << " exceeds N = " << n << ": no particle can be clean, eps_k = 1";
    est.warning = os.str();
  }

  // Contiguous trial chunks; integer tallies make the result independent of
  // the worker count.
  const int workers = default_workers();
  const std::size_t chunks = static_cast<std::size_t>(std::max(1, workers)) * 4;
  std::vector<long> unclean(chunks, 0), violations(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const long begin = static_cast<long>(static_cast<std::size_t>(trials) * c / chunks);
    const long end = static_cast<long>(static_cast<std::size_t>(trials) * (c + 1) / chunks);
    for (long t = begin; t < end; ++t) {
      const std::uint64_t trial_seed = derive_seed(seed, {static_cast<std::uint64_t>(t)});
      InfluenceLists lists(n, p);
      violations[c] += lists.size_invariant_violations();
      for (int step = 0; step < k; ++step) {
        lists = advance_lists(lists, sample_batch_plan(n, p, step, trial_seed));
        violations[c] += lists.size_invariant_violations();
      }
      if (!lists.clean(0)) ++unclean[c];
    }
  }, workers);

  long bad = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    bad += unclean[c];
    est.invariant_violations += violations[c];
  }
  est.epsilon_hat = static_cast<double>(bad) / static_cast<double>(trials);
  est.stderr_ = std::sqrt(est.epsilon_hat * (1.0 - est.epsilon_hat) / static_cast<double>(trials));
  return est;
}

}  // namespace csrbm
