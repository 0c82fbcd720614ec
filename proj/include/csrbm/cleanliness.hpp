#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csrbm/particle_dynamics.hpp"

namespace csrbm {

/// Influence lists L_i^(k) and clean flags after k batch steps.
///
/// Lists are sorted index sets stored in a flat buffer with a fixed
/// per-particle capacity min(p^k, N), so advancing never reallocates per
/// particle.
class InfluenceLists {
 public:
  /// k = 0: L_i = {i}, every particle clean.
  InfluenceLists(int n, int p);

  int size() const { return n_; }
  int batch_size() const { return p_; }
  int steps() const { return k_; }
  std::span<const int> list(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * capacity_, static_cast<std::size_t>(sizes_[i])};
  }
  bool clean(int i) const { return clean_[static_cast<std::size_t>(i)] != 0; }
  int clean_count() const;

  /// p^k, saturating; the list size a clean particle must have.
  long long full_size() const { return full_size_; }

  /// Number of particles violating "|L_i| <= p^k, with equality iff clean".
  int size_invariant_violations() const;

  friend InfluenceLists advance_lists(const InfluenceLists& state, const BatchPlan& plan);

 private:
  InfluenceLists() = default;

  int n_ = 0;
  int p_ = 0;
  int k_ = 0;
  std::size_t capacity_ = 1;
  long long full_size_ = 1;
  std::vector<int> data_;
  std::vector<int> sizes_;
  std::vector<char> clean_;
};

/// One batch step: lists become batchwise unions, and a particle stays clean
/// iff every batchmate was clean and the batchmates' previous lists are
/// pairwise disjoint.
InfluenceLists advance_lists(const InfluenceLists& state, const BatchPlan& plan);

struct EpsilonEstimate {
  int n = 0;
  int p = 0;
  int k = 0;
  long trials = 0;
  double epsilon_hat = 0.0;
  double stderr_ = 0.0;
  long invariant_violations = 0;  // summed over all particles and trials
  std::optional<std::string> warning;
};

/// Monte Carlo estimate of eps_k = P(particle 1 not clean after k steps)
/// over `trials` independent plan sequences, with the binomial standard
/// error. Trial t draws its plans from derive_seed(seed, {t}).
EpsilonEstimate estimate_epsilon(int n, int p, int k, long trials, std::uint64_t seed);

}  // namespace csrbm
