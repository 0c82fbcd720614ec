#include <array>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "csrbm/cleanliness.hpp"
#include "csrbm/errors.hpp"

using namespace csrbm;

namespace {

BatchPlan plan_from(int n, int p, std::vector<int> members) {
  BatchPlan plan;
  plan.n = n;
  plan.p = p;
  plan.members = std::move(members);
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t s = 0; s < plan.members.size(); ++s) plan.assignment[plan.members[s]] = static_cast<int>(s) / p;
  return plan;
}

std::vector<int> as_vector(std::span<const int> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(InfluenceLists, StartsWithSingletons) {
  InfluenceLists l(6, 2);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(as_vector(l.list(i)), std::vector<int>{i});
    EXPECT_TRUE(l.clean(i));
  }
  EXPECT_EQ(l.full_size(), 1);
}

TEST(InfluenceLists, RepeatedPairingIsNotClean) {
  const BatchPlan same = plan_from(4, 2, {0, 1, 2, 3});
  InfluenceLists l = advance_lists(InfluenceLists(4, 2), same);
  EXPECT_EQ(as_vector(l.list(0)), (std::vector<int>{0, 1}));
  EXPECT_TRUE(l.clean(0));
  EXPECT_EQ(l.clean_count(), 4);

  l = advance_lists(l, same);
  EXPECT_EQ(as_vector(l.list(0)), (std::vector<int>{0, 1}));
  EXPECT_FALSE(l.clean(0));
  EXPECT_EQ(l.clean_count(), 0);
  EXPECT_EQ(l.size_invariant_violations(), 0);
}

TEST(InfluenceLists, FreshPartnersStayClean) {
  InfluenceLists l = advance_lists(InfluenceLists(4, 2), plan_from(4, 2, {0, 1, 2, 3}));
  l = advance_lists(l, plan_from(4, 2, {0, 2, 1, 3}));
  EXPECT_EQ(as_vector(l.list(0)), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(l.clean_count(), 4);
  EXPECT_EQ(l.full_size(), 4);
}

TEST(InfluenceLists, UncleannessIsInherited) {
  // 0 and 1 pair twice; 2 then meets 1 and inherits the defect.
  const int n = 8;
  InfluenceLists l(n, 2);
  l = advance_lists(l, plan_from(n, 2, {0, 1, 2, 3, 4, 5, 6, 7}));
  l = advance_lists(l, plan_from(n, 2, {0, 1, 2, 4, 3, 5, 6, 7}));
  EXPECT_FALSE(l.clean(1));
  l = advance_lists(l, plan_from(n, 2, {1, 2, 0, 6, 3, 4, 5, 7}));
  EXPECT_FALSE(l.clean(2));
  EXPECT_EQ(l.size_invariant_violations(), 0);
}

TEST(InfluenceLists, InvariantHoldsOnRandomPlans) {
  InfluenceLists l(64, 4);
  for (int k = 0; k < 4; ++k) {
    l = advance_lists(l, sample_batch_plan(64, 4, k, 31));
    EXPECT_EQ(l.size_invariant_violations(), 0);
    for (int i = 0; i < 64; ++i) EXPECT_LE(static_cast<long long>(l.list(i).size()), l.full_size());
  }
}

TEST(Epsilon, ZeroForFewSteps) {
  EXPECT_EQ(estimate_epsilon(16, 2, 0, 1000, 1).epsilon_hat, 0.0);
  EXPECT_EQ(estimate_epsilon(16, 2, 1, 1000, 1).epsilon_hat, 0.0);
}

TEST(Epsilon, FourParticlesTwoSteps) {
  // Particle 0 is clean after two steps iff its second partner is new: 2/3.
  const EpsilonEstimate e = estimate_epsilon(4, 2, 2, 60000, 5);
  EXPECT_NEAR(e.epsilon_hat, 1.0 / 3.0, 3.0 * e.stderr_ + 1e-9);
  EXPECT_EQ(e.invariant_violations, 0);
  EXPECT_FALSE(e.warning);
}

TEST(Epsilon, ThreeStepsMatchesEnumeration) {
  // Exhaustive oracle for N = 8, p = 2, k = 3 on bitmask influence sets:
  // particle 0 is clean iff its set reached 2^k members. By relabeling
  // symmetry the first plan can be fixed; the other two run over all 105
  // perfect matchings.
  std::vector<std::vector<std::pair<int, int>>> matchings;
  std::vector<std::pair<int, int>> cur;
  auto rec = [&](auto&& self, unsigned left) -> void {
    if (left == 0) {
      matchings.push_back(cur);
      return;
    }
    const int a = __builtin_ctz(left);
    for (int b = a + 1; b < 8; ++b)
      if (left >> b & 1u) {
        cur.emplace_back(a, b);
        self(self, left & ~(1u << a) & ~(1u << b));
        cur.pop_back();
      }
  };
  rec(rec, 0xffu);
  ASSERT_EQ(matchings.size(), 105u);

  auto apply = [](std::array<unsigned, 8> sets, const std::vector<std::pair<int, int>>& m) {
    for (auto [a, b] : m) sets[a] = sets[b] = sets[a] | sets[b];
    return sets;
  };
  std::array<unsigned, 8> start{};
  for (int i = 0; i < 8; ++i) start[i] = 1u << i;
  const auto first = apply(start, matchings.front());
  long clean = 0;
  for (const auto& m2 : matchings) {
    const auto second = apply(first, m2);
    for (const auto& m3 : matchings) clean += __builtin_popcount(apply(second, m3)[0]) == 8;
  }
  const double oracle = 1.0 - static_cast<double>(clean) / (105.0 * 105.0);

  const EpsilonEstimate e = estimate_epsilon(8, 2, 3, 100000, 6);
  EXPECT_NEAR(e.epsilon_hat, oracle, 3.0 * e.stderr_);
}

TEST(Epsilon, SaturatedWarns) {
  const EpsilonEstimate e = estimate_epsilon(8, 2, 4, 100, 7);
  EXPECT_TRUE(e.warning);
  EXPECT_EQ(e.epsilon_hat, 1.0);
}

TEST(Epsilon, RejectsBadArguments) {
  EXPECT_THROW(estimate_epsilon(10, 3, 2, 10, 1), ConfigError);
  EXPECT_THROW(estimate_epsilon(10, 2, -1, 10, 1), ConfigError);
  EXPECT_THROW(estimate_epsilon(10, 2, 2, 0, 1), ConfigError);
}
