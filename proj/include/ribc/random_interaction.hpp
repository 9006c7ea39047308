#pragma once

// Random edge-set generators and the uniform lower bound delta on the
// probability of drawing any particular edge set, the quantity the
// convergence-rate bounds are stated in.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "ribc/opinion.hpp"

namespace ribc {

// Counter-based splitmix64 stream. Streams are addressed by
// (master_seed, stream_id); equal addresses replay bitwise-equal sequences,
// which is what makes trials reproducible and independent of scheduling.
class SeededStream {
 public:
  SeededStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : state_(mix(mix(master_seed) ^ mix(stream_id + 0x9E3779B97F4A7C15ull))) {}

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform on [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

// Every ordered pair appears independently with one shared probability p.
struct ErdosRenyiDirected {
  double p;
  bool operator==(const ErdosRenyiDirected&) const = default;
};

// Independent per-pair probabilities, row-major n x n with unused diagonal.
struct PairMatrix {
  std::vector<double> probs;
  bool operator==(const PairMatrix&) const = default;
};

// Every edge subset equally likely; same as per-pair probability 1/2.
struct UniformSubset {
  bool operator==(const UniformSubset&) const = default;
};

// A distribution over edge sets with independent pairs. All three generators
// satisfy the positive-probability condition the theory needs: every edge
// subset is drawn with probability at least delta_lower_bound() > 0.
class InteractionModel {
 public:
  InteractionModel() : InteractionModel(erdos_renyi(3, 0.5)) {}

  static InteractionModel erdos_renyi(int n, double p) {
    check_probability(p, "edge probability");
    return InteractionModel(n, ErdosRenyiDirected{p});
  }

  static InteractionModel pair_matrix(int n, std::vector<double> probs) {
    if (static_cast<std::int64_t>(probs.size()) != static_cast<std::int64_t>(n) * n)
      throw std::invalid_argument("pair matrix must be n*n row-major");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) check_probability(probs[static_cast<std::size_t>(i) * n + j], "pair probability");
    return InteractionModel(n, PairMatrix{std::move(probs)});
  }

  static InteractionModel uniform_subset(int n) { return InteractionModel(n, UniformSubset{}); }

  int agents() const { return n_; }

  double pair_probability(int i, int j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || i == j)
      throw std::out_of_range("ordered pair out of range");
    if (const auto* er = std::get_if<ErdosRenyiDirected>(&model_)) return er->p;
    if (const auto* pm = std::get_if<PairMatrix>(&model_))
      return pm->probs[static_cast<std::size_t>(i) * n_ + j];
    return 0.5;
  }

  const char* kind() const {
    if (std::holds_alternative<ErdosRenyiDirected>(model_)) return "erdos_renyi";
    if (std::holds_alternative<PairMatrix>(model_)) return "pair_matrix";
    return "uniform_subset";
  }

  const std::variant<ErdosRenyiDirected, PairMatrix, UniformSubset>& generator() const {
    return model_;
  }

  bool operator==(const InteractionModel&) const = default;

 private:
  InteractionModel(int n, std::variant<ErdosRenyiDirected, PairMatrix, UniformSubset> m)
      : n_(n), model_(std::move(m)) {
    if (n_ < 2) throw std::invalid_argument("interaction models need at least two agents");
  }

  static void check_probability(double p, const char* what) {
    if (!(p > 0.0) || !(p < 1.0))
      throw std::invalid_argument(std::string(what) +
                                  " must lie strictly in (0,1) so that every edge subset keeps "
                                  "positive probability");
  }

  int n_;
  std::variant<ErdosRenyiDirected, PairMatrix, UniformSubset> model_;
};

// Draw one edge set. Exactly one uniform draw is consumed per ordered pair in
// canonical order, so the stream position after k draws is the same for every
// outcome and replays align.
inline EdgeSet sample_edge_set(const InteractionModel& model, SeededStream& rng) {
  const int n = model.agents();
  EdgeSet e(n);
  for (std::int64_t k = 0; k < EdgeSet::pair_count(n); ++k) {
    const auto [i, j] = EdgeSet::edge_at(n, k);
    if (rng.next_unit() < model.pair_probability(i, j)) e.insert(i, j);
  }
  return e;
}

// Product over ordered pairs of min(p_ij, 1 - p_ij): a probability every edge
// subset is drawn with at least.
inline double delta_lower_bound(const InteractionModel& model) {
  const int n = model.agents();
  double delta = 1.0;
  for (std::int64_t k = 0; k < EdgeSet::pair_count(n); ++k) {
    const auto [i, j] = EdgeSet::edge_at(n, k);
    const double p = model.pair_probability(i, j);
    delta *= std::min(p, 1.0 - p);
  }
  return delta;
}

struct LowBoundReport {
  double delta = 0.0;              // claimed lower bound
  double min_probability = 0.0;    // smallest subset probability found
  std::uint64_t min_subset = 0;    // bitmask over canonical pair indices attaining it
  double total_probability = 0.0;  // sum over all subsets
  std::uint64_t subset_count = 0;
  bool min_matches_delta = false;  // exact equality, no tolerance
  bool total_near_one = false;     // |total - 1| <= 1e-12

  bool passed() const { return min_matches_delta && total_near_one; }
};

// Enumerate all 2^(n(n-1)) edge subsets and check the lower bound exactly.
// Each subset probability multiplies per-pair factors in canonical order, the
// same order delta_lower_bound uses, so the minimum must match delta bitwise.
inline LowBoundReport verify_lowbound_exhaustive(const InteractionModel& model) {
  const int n = model.agents();
  const std::int64_t m = EdgeSet::pair_count(n);
  if (m > 20)
    throw std::invalid_argument("exhaustive check enumerates 2^(n(n-1)) subsets; need n(n-1) <= 20");

  std::vector<double> p(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    const auto [i, j] = EdgeSet::edge_at(n, k);
    p[static_cast<std::size_t>(k)] = model.pair_probability(i, j);
  }

  LowBoundReport report;
  report.delta = delta_lower_bound(model);
  report.subset_count = std::uint64_t{1} << m;
  report.min_probability = 2.0;

  double total = 0.0, comp = 0.0;  // Kahan sum: 2^20 plain adds would drift past 1e-12
  for (std::uint64_t mask = 0; mask < report.subset_count; ++mask) {
    double prob = 1.0;
    for (std::int64_t k = 0; k < m; ++k)
      prob *= (mask >> k & 1u) ? p[static_cast<std::size_t>(k)]
                               : 1.0 - p[static_cast<std::size_t>(k)];
    if (prob < report.min_probability) {
      report.min_probability = prob;
      report.min_subset = mask;
    }
    const double y = prob - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  report.total_probability = total;
  report.min_matches_delta = report.min_probability == report.delta;
  report.total_near_one = std::abs(total - 1.0) <= 1e-12;
  return report;
}

}  // namespace ribc
