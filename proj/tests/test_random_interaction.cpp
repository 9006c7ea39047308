#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ribc/random_interaction.hpp"

using namespace ribc;
using Catch::Matchers::ContainsSubstring;

static_assert(std::uniform_random_bit_generator<SeededStream>);

TEST_CASE("streams replay bitwise and separate by id") {
  SeededStream a(9, 4), b(9, 4), c(9, 5), d(10, 4);
  bool same = true, differs_id = false, differs_seed = false;
  for (int k = 0; k < 64; ++k) {
    const std::uint64_t va = a.next();
    same = same && va == b.next();
    differs_id = differs_id || va != c.next();
    differs_seed = differs_seed || va != d.next();
  }
  REQUIRE(same);
  REQUIRE(differs_id);
  REQUIRE(differs_seed);
}

TEST_CASE("unit draws look uniform") {
  SeededStream rng(12345, 0);
  const int N = 100000;
  double sum = 0.0, sumsq = 0.0, cross = 0.0, prev = 0.0;
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < N; ++k) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
    if (k > 0) cross += (u - 0.5) * (prev - 0.5);
    prev = u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  const double mean = sum / N;
  const double var = sumsq / N - mean * mean;
  REQUIRE(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * N));
  REQUIRE(std::abs(var - 1.0 / 12.0) < 0.002);
  REQUIRE(std::abs(cross / (N - 1) / (1.0 / 12.0)) < 4.0 / std::sqrt(static_cast<double>(N)));
  REQUIRE(lo < 0.001);
  REQUIRE(hi > 0.999);
}

TEST_CASE("sampled edge sets cover all 64 graphs uniformly at p = 0.5") {
  const auto model = InteractionModel::erdos_renyi(3, 0.5);
  SeededStream rng(20260814, 1);
  const int N = 100000;
  std::vector<int> count(64, 0);
  for (int k = 0; k < N; ++k) {
    const EdgeSet e = sample_edge_set(model, rng);
    std::uint64_t mask = 0;
    for (const std::int64_t idx : e.edge_indices()) mask |= std::uint64_t{1} << idx;
    ++count[mask];
  }
  const double expect = N / 64.0;
  double chi2 = 0.0;
  for (const int c : count) {
    chi2 += (c - expect) * (c - expect) / expect;
    const double se = std::sqrt(expect * (1.0 - 1.0 / 64.0));
    REQUIRE(std::abs(c - expect) < 4.0 * se);
  }
  REQUIRE(chi2 < 103.442);  // chi-square 0.999 quantile at 63 degrees of freedom
}

TEST_CASE("edge sampling consumes one draw per ordered pair") {
  const auto model = InteractionModel::erdos_renyi(4, 0.9999999);
  SeededStream used(7, 7), reference(7, 7);
  (void)sample_edge_set(model, used);
  for (std::int64_t k = 0; k < EdgeSet::pair_count(4); ++k) (void)reference.next();
  REQUIRE(used.next() == reference.next());
}

TEST_CASE("interaction models validate probabilities") {
  REQUIRE_THROWS_WITH(InteractionModel::erdos_renyi(3, 0.0), ContainsSubstring("strictly in (0,1)"));
  REQUIRE_THROWS_WITH(InteractionModel::erdos_renyi(3, 1.0), ContainsSubstring("strictly in (0,1)"));
  REQUIRE_THROWS_AS(InteractionModel::erdos_renyi(1, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(InteractionModel::pair_matrix(3, std::vector<double>(8, 0.5)),
                    std::invalid_argument);
  std::vector<double> probs(9, 0.5);
  probs[1] = 1.0;
  REQUIRE_THROWS_WITH(InteractionModel::pair_matrix(3, probs), ContainsSubstring("strictly in (0,1)"));

  const auto er = InteractionModel::erdos_renyi(3, 0.4);
  REQUIRE(er.kind() == "erdos_renyi");
  REQUIRE(er.agents() == 3);
  REQUIRE(er.pair_probability(0, 2) == 0.4);
  REQUIRE(InteractionModel::uniform_subset(3).pair_probability(1, 0) == 0.5);
  REQUIRE(er == InteractionModel::erdos_renyi(3, 0.4));
  REQUIRE_FALSE(er == InteractionModel::erdos_renyi(3, 0.5));
}

TEST_CASE("delta is the exact product of per-pair minimum probabilities") {
  REQUIRE(delta_lower_bound(InteractionModel::erdos_renyi(3, 0.5)) == 0.015625);
  REQUIRE(delta_lower_bound(InteractionModel::uniform_subset(3)) == 0.015625);
  REQUIRE(delta_lower_bound(InteractionModel::erdos_renyi(5, 0.5)) == 9.5367431640625e-07);

  double want = 1.0;
  for (int k = 0; k < 6; ++k) want *= 0.3;
  REQUIRE(delta_lower_bound(InteractionModel::erdos_renyi(3, 0.3)) == want);

  std::vector<double> probs(9, 0.0);
  const double vals[6] = {0.12, 0.34, 0.56, 0.78, 0.9, 0.41};
  int v = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) probs[static_cast<std::size_t>(i) * 3 + j] = vals[v++];
  const auto pm = InteractionModel::pair_matrix(3, probs);
  double mixed = 1.0;
  for (std::int64_t k = 0; k < EdgeSet::pair_count(3); ++k) {
    const auto [i, j] = EdgeSet::edge_at(3, k);
    const double p = pm.pair_probability(i, j);
    mixed *= std::min(p, 1.0 - p);
  }
  REQUIRE(delta_lower_bound(pm) == mixed);
}

TEST_CASE("exhaustive enumeration confirms the lower bound") {
  for (const double p : {0.3, 0.5, 0.7}) {
    const auto report = verify_lowbound_exhaustive(InteractionModel::erdos_renyi(3, p));
    REQUIRE(report.subset_count == 64);
    REQUIRE(report.min_matches_delta);
    REQUIRE(report.total_near_one);
    REQUIRE(report.passed());
  }
  REQUIRE(verify_lowbound_exhaustive(InteractionModel::erdos_renyi(3, 0.3)).min_subset == 63);
  REQUIRE(verify_lowbound_exhaustive(InteractionModel::erdos_renyi(3, 0.7)).min_subset == 0);

  // 5 agents means 20 ordered pairs, the largest enumerable size; 6 is refused.
  REQUIRE(verify_lowbound_exhaustive(InteractionModel::erdos_renyi(5, 0.5)).passed());
  REQUIRE_THROWS_AS(verify_lowbound_exhaustive(InteractionModel::erdos_renyi(6, 0.5)),
                    std::invalid_argument);
}
