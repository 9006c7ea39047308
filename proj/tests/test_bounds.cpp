#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "ribc/bounds.hpp"

using namespace ribc;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

TEST_CASE("coarse horizon matches hand-computed values") {
  REQUIRE_THAT(compute_Tn(3, 1.0), WithinRel(38.16465346877546, 1e-12));
  REQUIRE_THAT(compute_Tn(3, 0.7), WithinRel(86.53010609158879, 1e-12));
  REQUIRE_THAT(compute_Tn(5, 0.3), WithinRel(558.1721414981621, 1e-12));
  REQUIRE(compute_Tn(3, 2.0) == 8.0);
  REQUIRE(floor_Tn(3, 0.7) == 86);
  REQUIRE(floor_Tn(5, 0.3) == 558);
  REQUIRE(floor_Tn(3, 2.0) == 8);
}

TEST_CASE("sharp horizon matches hand-computed values") {
  REQUIRE(compute_Tn_star(3, 1.0) == 15.0);
  REQUIRE(compute_Tn_star(4, 1.0) == 30.0);
  REQUIRE(compute_Tn_star(3, 0.5) == 46.0);
  for (int n = 3; n <= 8; ++n) REQUIRE(compute_Tn_star(n, 2.0) == 3.0 * n - 5.0);
}

TEST_CASE("horizons reject out-of-domain arguments") {
  REQUIRE_THROWS_AS(compute_Tn(2, 1.0), std::invalid_argument);
  REQUIRE_THROWS_WITH(compute_Tn(3, 0.0), ContainsSubstring("(0,2]"));
  REQUIRE_THROWS_WITH(compute_Tn(3, 2.5), ContainsSubstring("(0,2]"));
  REQUIRE_THROWS_AS(compute_Tn_star(2, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(compute_Tn_star(3, -1.0), std::invalid_argument);
}

TEST_CASE("merge bounds match hand-computed values") {
  const MergeBound a = compute_S_T(1, 1, 1.0, 0.5);
  REQUIRE(a.phase_limit == 5);
  REQUIRE(a.halving_limit == 1);
  REQUIRE(a.step_limit == 11);

  const MergeBound b = compute_S_T(2, 1, 1.0, 0.3);
  REQUIRE(b.phase_limit == 12);
  REQUIRE(b.halving_limit == 2);
  REQUIRE(b.step_limit == 37);

  // Already inside the small radius: the phase formula still grants one
  // phase, no halvings, so the closing clique fits in two steps.
  const MergeBound c = compute_S_T(1, 1, 0.2, 0.5);
  REQUIRE(c.phase_limit == 1);
  REQUIRE(c.halving_limit == 0);
  REQUIRE(c.step_limit == 2);

  REQUIRE_THROWS_AS(compute_S_T(0, 1, 1.0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(compute_S_T(1, 1, -1.0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(compute_S_T(1, 1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("tail bound matches hand-computed values and is monotone") {
  REQUIRE(tau_tail_bound(0, 37, 0.5) == 1.0);
  REQUIRE(tau_tail_bound(37, 37, 0.5) == 1.0);
  REQUIRE_THAT(tau_tail_bound(38, 37, 0.5), WithinRel(0.999999999992724, 1e-12));
  REQUIRE_THAT(tau_tail_bound(76, 37, 0.5), WithinRel(0.9999999999854481, 1e-12));

  for (std::int64_t t = 1; t <= 200; ++t)
    REQUIRE(tau_tail_bound(t, 5, 0.25) <= tau_tail_bound(t - 1, 5, 0.25));

  // A full block multiplies one more factor of (1 - delta^t*).
  const double base = 1.0 - std::pow(0.25, 5.0);
  REQUIRE(tau_tail_bound(6, 5, 0.25) == std::pow(base, 1.0));
  REQUIRE(tau_tail_bound(12, 5, 0.25) == std::pow(base, 2.0));

  REQUIRE_THROWS_AS(tau_tail_bound(-1, 5, 0.25), std::invalid_argument);
  REQUIRE_THROWS_AS(tau_tail_bound(5, 0, 0.25), std::invalid_argument);
  REQUIRE_THROWS_AS(tau_tail_bound(5, 5, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(tau_tail_bound(5, 5, 1.0), std::invalid_argument);
}

TEST_CASE("mse envelope scales the tail by the worst-case energy") {
  REQUIRE(mse_envelope(0, 3, 0.7, 0.015625) == 12.0);
  const double tail = tau_tail_bound(100, floor_Tn(3, 0.7), 0.015625);
  REQUIRE(mse_envelope(100, 3, 0.7, 0.015625) == 12.0 * tail);
  for (std::int64_t t = 1; t <= 300; ++t)
    REQUIRE(mse_envelope(t, 3, 0.7, 0.015625) <= mse_envelope(t - 1, 3, 0.7, 0.015625));
}

TEST_CASE("sharp horizon stays below the coarse one on a grid") {
  for (int n = 3; n <= 40; ++n)
    for (const double r : {0.1, 0.5, 1.0, 1.5, 2.0}) {
      REQUIRE(compute_Tn_star(n, r) > 0.0);
      REQUIRE(compute_Tn_star(n, r) < compute_Tn(n, r));
    }
}
