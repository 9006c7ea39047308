#pragma once

// Closed-form step-count bounds for the controlled merge construction and the
// tail/MSE envelopes for the random-interaction dynamics. All formulas are
// deterministic functions of (n, r_n) or of per-merge quantities; the Monte
// Carlo suites check the random system against them.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ribc {

struct MergeBound {
  std::int64_t phase_limit;    // S: bound on approach-and-star phases
  std::int64_t halving_limit;  // T: bound on halving steps inside one phase
  std::int64_t step_limit;     // S*(T+1)+1, counting the closing clique step
};

// Worst-case step count for merging a J-agent cluster with a K-agent cluster
// that start d0 apart when the smallest confidence bound involved is r_min.
inline MergeBound compute_S_T(std::int64_t J, std::int64_t K, double d0, double r_min) {
  if (J < 1 || K < 1) throw std::invalid_argument("cluster sizes must be positive");
  if (!(d0 > 0.0)) throw std::invalid_argument("initial distance must be positive");
  if (!(r_min > 0.0)) throw std::invalid_argument("r_min must be positive");
  const double ratio = d0 / r_min;
  const double phases =
      std::ceil((ratio - 1.0) * (4.0 * static_cast<double>(J) * static_cast<double>(K + 1)) /
                    static_cast<double>(J + K + 1) +
                2.0);
  MergeBound b;
  b.phase_limit = std::max<std::int64_t>(static_cast<std::int64_t>(phases), 0);
  b.halving_limit =
      std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(std::log2(ratio))), 0);
  b.step_limit = b.phase_limit * (b.halving_limit + 1) + 1;
  return b;
}

namespace detail {

inline void check_bound_domain(int n, double r_n) {
  if (n < 3) throw std::invalid_argument("bounds are stated for n >= 3 agents");
  if (!(r_n > 0.0) || !(r_n <= 2.0))
    throw std::invalid_argument("smallest confidence bound must lie in (0,2]");
}

}  // namespace detail

// Deterministic bound on the convergence time of the control scheme, the
// coarse closed form. Real-valued; take the floor for a step count.
inline double compute_Tn(int n, double r_n) {
  detail::check_bound_domain(n, r_n);
  const double ratio = 2.0 / r_n;
  const double levels = std::ceil(std::log2(ratio)) + 1.0;
  const double bracket =
      3.0 * n - 2.0 + 8.0 * (ratio - 1.0) * (n + 5.0 / 3.0 - 2.0 * std::log(n + 2.0));
  return bracket * levels + (n - 2.0);
}

inline std::int64_t floor_Tn(int n, double r_n) {
  return static_cast<std::int64_t>(std::floor(compute_Tn(n, r_n)));
}

// Sharper variant summing the per-merge phase bounds directly; always below
// compute_Tn on the shared domain.
inline double compute_Tn_star(int n, double r_n) {
  detail::check_bound_domain(n, r_n);
  const double ratio = 2.0 / r_n;
  const double levels = std::ceil(std::log2(ratio)) + 1.0;
  double phases = 1.0;
  for (int i = 2; i <= n - 1; ++i)
    phases += std::ceil((ratio - 1.0) * 8.0 * i / (i + 2.0) + 2.0);
  return phases * levels + (n - 2.0);
}

// Upper bound on P(tau > t) when every edge subset has probability >= delta
// and the controlled system would finish within tstar steps.
inline double tau_tail_bound(std::int64_t t, std::int64_t tstar, double delta) {
  if (t < 0) throw std::invalid_argument("t must be nonnegative");
  if (tstar < 1) throw std::invalid_argument("tstar must be positive");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const double block_success = std::pow(delta, static_cast<double>(tstar));
  const double blocks = std::floor(static_cast<double>(t) / static_cast<double>(tstar + 1));
  return std::pow(1.0 - block_success, blocks);
}

// Envelope for E||x(t) - x*||^2 when opinions start in the unit ball: the
// squared diameter 4n times the tail bound at horizon floor(Tn).
inline double mse_envelope(std::int64_t t, int n, double r_n, double delta) {
  if (t < 0) throw std::invalid_argument("t must be nonnegative");
  detail::check_bound_domain(n, r_n);
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const std::int64_t horizon = floor_Tn(n, r_n);
  return 4.0 * n * tau_tail_bound(t, horizon, delta);
}

}  // namespace ribc
