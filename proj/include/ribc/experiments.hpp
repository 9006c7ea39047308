#pragma once

// Monte Carlo driver for the random-interaction dynamics: reproducible
// per-trial streams, absorption detection, decimated trajectories, and the
// summary curves the dominance checks compare against the closed-form bounds.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "ribc/opinion.hpp"
#include "ribc/random_interaction.hpp"

namespace ribc {

inline double sphere_volume(int d, double a) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(a >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(a, d);
}

// Standard normals via the polar method, so draws depend only on the stream.
inline void fill_gaussian(SeededStream& rng, std::span<double> out) {
  std::size_t k = 0;
  while (k < out.size()) {
    const double u = 2.0 * rng.next_unit() - 1.0;
    const double v = 2.0 * rng.next_unit() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    out[k++] = u * f;
    if (k < out.size()) out[k++] = v * f;
  }
}

inline std::vector<double> random_unit_vector(SeededStream& rng, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  std::vector<double> g(static_cast<std::size_t>(d));
  double len = 0.0;
  do {
    fill_gaussian(rng, g);
    len = norm(g);
  } while (len == 0.0);
  for (double& v : g) v /= len;
  return g;
}

inline std::vector<double> uniform_in_ball(SeededStream& rng, int d, double radius) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(radius >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
  std::vector<double> g = random_unit_vector(rng, d);
  const double scale = radius * std::pow(rng.next_unit(), 1.0 / d);
  for (double& v : g) v *= scale;
  return g;
}

// Initial condition that keeps agent 0 permanently out of everyone's reach:
// agent 0 starts in a small ball around z, the rest around -z, with
// ||z|| = (4+r1)/6 and ball radius (2-r1)/6. Any two agents on opposite
// sides then sit at least (2+2r1)/3 > r1 apart, all inside the unit ball.
inline SystemState corollary2_counterexample_init(int n, int d, double r1, SeededStream& rng) {
  if (n < 3) throw std::invalid_argument("at least 3 agents required");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(r1 > 0.0) || !(r1 < 2.0))
    throw std::invalid_argument("largest confidence bound must lie in (0,2) for a counterexample");

  const std::vector<double> axis = random_unit_vector(rng, d);
  const double center = (4.0 + r1) / 6.0;
  const double radius = (2.0 - r1) / 6.0;

  SystemState state(n, d);
  for (int i = 0; i < n; ++i) {
    const double side = (i == 0) ? 1.0 : -1.0;
    const std::vector<double> jitter = uniform_in_ball(rng, d, radius);
    auto xi = state.opinion(i);
    for (int k = 0; k < d; ++k)
      xi[static_cast<std::size_t>(k)] =
          side * center * axis[static_cast<std::size_t>(k)] + jitter[static_cast<std::size_t>(k)];
  }
  return state;
}

struct ExplicitInit {
  std::vector<std::vector<double>> opinions;
  bool operator==(const ExplicitInit&) const = default;
};
struct UniformBallInit {
  bool operator==(const UniformBallInit&) const = default;
};
// corollary2_counterexample_init with r1 taken from the profile's first bound.
struct CounterexampleInit {
  bool operator==(const CounterexampleInit&) const = default;
};

using InitialCondition = std::variant<ExplicitInit, UniformBallInit, CounterexampleInit>;

struct ExperimentConfig {
  int n = 3;
  int d = 1;
  std::vector<double> bounds = {0.7, 0.7, 0.7};
  InitialCondition init = UniformBallInit{};
  InteractionModel model = InteractionModel::erdos_renyi(3, 0.5);
  double eps_eq = 1e-9;
  int trials = 1;
  std::int64_t max_steps = 100000;
  std::uint64_t master_seed = 0;
  std::int64_t decimate = 0;  // 0 keeps no trajectory; k>0 keeps every k-th time

  bool operator==(const ExperimentConfig&) const = default;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 3) throw std::invalid_argument("at least 3 agents required");
  if (cfg.d < 1) throw std::invalid_argument("dimension must be positive");
  if (static_cast<int>(cfg.bounds.size()) != cfg.n)
    throw std::invalid_argument("confidence bounds must list one radius per agent");
  (void)ConfidenceProfile(cfg.bounds);  // rejects empty, nonpositive, or increasing radii
  if (cfg.model.agents() != cfg.n)
    throw std::invalid_argument("interaction model must cover all agents");
  if (!(cfg.eps_eq >= 0.0)) throw std::invalid_argument("eps_eq must be nonnegative");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be positive");
  if (cfg.max_steps < 1) throw std::invalid_argument("max_steps must be positive");
  if (cfg.decimate < 0) throw std::invalid_argument("decimate must be nonnegative");
  if (const auto* ex = std::get_if<ExplicitInit>(&cfg.init)) {
    if (static_cast<int>(ex->opinions.size()) != cfg.n)
      throw std::invalid_argument("explicit init must list one opinion per agent");
    for (const auto& row : ex->opinions)
      if (static_cast<int>(row.size()) != cfg.d)
        throw std::invalid_argument("explicit init opinions must have the configured dimension");
  }
  if (std::holds_alternative<CounterexampleInit>(cfg.init) && !(cfg.bounds.front() < 2.0))
    throw std::invalid_argument("counterexample init needs the largest bound below 2");
}

// Trial t uses streams (master_seed, 2t) for the initial condition and
// (master_seed, 2t+1) for edge draws, so trials replay independently.
inline SystemState initial_state(const ExperimentConfig& cfg, SeededStream& rng) {
  if (const auto* ex = std::get_if<ExplicitInit>(&cfg.init))
    return SystemState::from_opinions(ex->opinions);
  if (std::holds_alternative<CounterexampleInit>(cfg.init))
    return corollary2_counterexample_init(cfg.n, cfg.d, cfg.bounds.front(), rng);
  SystemState state(cfg.n, cfg.d);
  for (int i = 0; i < cfg.n; ++i) {
    const std::vector<double> x = uniform_in_ball(rng, cfg.d, 1.0);
    std::copy(x.begin(), x.end(), state.opinion(i).begin());
  }
  return state;
}

struct TrialRecord {
  int trial_id = 0;
  std::int64_t tau = -1;  // first absorbing time; -1 when the step cap hit
  bool capped = false;
  bool absorbing_ok = true;  // 100 post-absorption probe steps stayed within eps_eq
  bool consensus = false;
  std::vector<std::vector<int>> final_clusters;
  std::vector<double> final_opinions;  // row-major n x d at absorption (or at the cap)
  std::vector<std::pair<std::int64_t, std::vector<double>>> trajectory;

  bool operator==(const TrialRecord&) const = default;
};

inline TrialRecord run_trial(const ExperimentConfig& cfg, int trial_id) {
  validate_config(cfg);
  if (trial_id < 0) throw std::invalid_argument("trial id must be nonnegative");

  SeededStream init_rng(cfg.master_seed, 2 * static_cast<std::uint64_t>(trial_id));
  SeededStream edge_rng(cfg.master_seed, 2 * static_cast<std::uint64_t>(trial_id) + 1);
  const std::span<const double> bounds(cfg.bounds);

  SystemState state = initial_state(cfg, init_rng);
  SystemState scratch(cfg.n, cfg.d);

  TrialRecord rec;
  rec.trial_id = trial_id;
  if (cfg.decimate > 0) rec.trajectory.emplace_back(0, state.flat());

  std::int64_t t = 0;
  while (true) {
    if (is_E1(state, bounds, cfg.eps_eq)) {
      rec.tau = t;
      break;
    }
    if (t >= cfg.max_steps) {
      rec.capped = true;
      break;
    }
    const EdgeSet e = sample_edge_set(cfg.model, edge_rng);
    step_into(state, bounds, e, scratch);
    std::swap(state, scratch);
    ++t;
    if (cfg.decimate > 0 && t % cfg.decimate == 0) rec.trajectory.emplace_back(t, state.flat());
  }

  rec.final_opinions = state.flat();
  if (rec.capped) return rec;

  // Probe: the absorbing state must not move past eps_eq in any coordinate
  // under 100 further random draws. The probe states are discarded.
  const SystemState absorbed = state;
  for (int probe = 0; probe < 100 && rec.absorbing_ok; ++probe) {
    const EdgeSet e = sample_edge_set(cfg.model, edge_rng);
    step_into(state, bounds, e, scratch);
    std::swap(state, scratch);
    for (std::size_t k = 0; k < absorbed.flat().size(); ++k)
      if (std::abs(state.flat()[k] - absorbed.flat()[k]) > cfg.eps_eq) {
        rec.absorbing_ok = false;
        break;
      }
  }

  rec.final_clusters = detect_clusters(absorbed, bounds, cfg.eps_eq).clusters;
  rec.consensus = rec.final_clusters.size() == 1;
  return rec;
}

inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const int trials = cfg.trials;
  std::vector<std::optional<TrialRecord>> slots(static_cast<std::size_t>(trials));

  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));

  if (workers <= 1) {
    for (int tid = 0; tid < trials; ++tid) slots[static_cast<std::size_t>(tid)] = run_trial(cfg, tid);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.push_back(std::async(std::launch::async, [&]() {
        for (int tid = next.fetch_add(1); tid < trials; tid = next.fetch_add(1))
          slots[static_cast<std::size_t>(tid)] = run_trial(cfg, tid);
      }));
    for (auto& f : pool) f.get();
  }

  std::vector<TrialRecord> records;
  records.reserve(static_cast<std::size_t>(trials));
  for (auto& s : slots) records.push_back(std::move(*s));
  return records;
}

// P(tau >= t) on t = 0..max_tau+1. Requires every trial to have absorbed.
inline std::vector<std::pair<std::int64_t, double>> tau_survival_curve(
    const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("survival curve needs at least one record");
  std::int64_t tmax = 0;
  for (const auto& r : records) {
    if (r.capped) throw std::invalid_argument("survival curve needs every trial absorbed");
    tmax = std::max(tmax, r.tau);
  }
  std::vector<std::pair<std::int64_t, double>> curve;
  curve.reserve(static_cast<std::size_t>(tmax) + 2);
  for (std::int64_t t = 0; t <= tmax + 1; ++t) {
    std::size_t alive = 0;
    for (const auto& r : records)
      if (r.tau >= t) ++alive;
    curve.emplace_back(t, static_cast<double>(alive) / static_cast<double>(records.size()));
  }
  return curve;
}

struct MseCurvePoint {
  std::int64_t t;
  double mean;       // average over trials of sum_i ||x_i(t) - x_i(tau)||^2
  double std_error;  // sample standard deviation / sqrt(trials)
};

// Mean squared displacement from each trial's absorbed state. Requires dense
// trajectories (decimate == 1) and every trial absorbed.
inline std::vector<MseCurvePoint> mse_curve(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("mse curve needs at least one record");
  std::int64_t tmax = 0;
  for (const auto& r : records) {
    if (r.capped) throw std::invalid_argument("mse curve needs every trial absorbed");
    if (static_cast<std::int64_t>(r.trajectory.size()) != r.tau + 1)
      throw std::invalid_argument("mse curve needs trajectories recorded at every step");
    for (std::size_t k = 0; k < r.trajectory.size(); ++k)
      if (r.trajectory[k].first != static_cast<std::int64_t>(k))
        throw std::invalid_argument("mse curve needs trajectories recorded at every step");
    tmax = std::max(tmax, r.tau);
  }

  std::vector<MseCurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(tmax) + 1);
  const double count = static_cast<double>(records.size());
  for (std::int64_t t = 0; t <= tmax; ++t) {
    double sum = 0.0, sumsq = 0.0;
    for (const auto& r : records) {
      const auto& snap = r.trajectory[static_cast<std::size_t>(std::min(t, r.tau))].second;
      double sq = 0.0;
      for (std::size_t k = 0; k < snap.size(); ++k) {
        const double diff = snap[k] - r.final_opinions[k];
        sq += diff * diff;
      }
      sum += sq;
      sumsq += sq * sq;
    }
    const double mean = sum / count;
    double se = 0.0;
    if (records.size() > 1) {
      const double var = std::max(0.0, (sumsq - count * mean * mean) / (count - 1.0));
      se = std::sqrt(var / count);
    }
    curve.push_back({t, mean, se});
  }
  return curve;
}

struct Corollary1Report {
  int trials = 0;
  int consensus_trials = 0;
  bool all_consensus = false;
  std::int64_t tau_min = 0;
  std::int64_t tau_max = 0;
  double tau_mean = 0.0;
};

// With the widest bound at least 2 and opinions in the unit ball, every trial
// must end in consensus; this runs the experiment and tallies the outcome.
inline Corollary1Report corollary1_experiment(const ExperimentConfig& cfg) {
  if (!(cfg.bounds.front() >= 2.0))
    throw std::invalid_argument("consensus guarantee needs the largest bound at least 2");
  const std::vector<TrialRecord> records = run_experiment(cfg);

  Corollary1Report report;
  report.trials = static_cast<int>(records.size());
  report.all_consensus = true;
  report.tau_min = records.front().capped ? -1 : records.front().tau;
  double total = 0.0;
  for (const auto& r : records) {
    const bool ok = !r.capped && r.consensus;
    if (ok) ++report.consensus_trials;
    report.all_consensus = report.all_consensus && ok;
    if (!r.capped) {
      report.tau_min = std::min(report.tau_min, r.tau);
      report.tau_max = std::max(report.tau_max, r.tau);
      total += static_cast<double>(r.tau);
    }
  }
  report.tau_mean = total / static_cast<double>(report.trials);
  return report;
}

}  // namespace ribc
