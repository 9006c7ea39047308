#pragma once

// Verification battery. Each check mirrors one acceptance criterion and runs
// self-contained with pinned tolerances; the acceptance binary and the CLI
// `verify` mode both print one line per check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ribc/bounds.hpp"
#include "ribc/control.hpp"
#include "ribc/experiments.hpp"
#include "ribc/opinion.hpp"
#include "ribc/random_interaction.hpp"

namespace ribc::verify {

constexpr std::uint64_t kDefaultSeed = 20260814;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

class Check {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++failures_;
      if (static_cast<int>(notes_.size()) < 6) notes_.push_back(what);
    }
  }

  bool passed() const { return failures_ == 0; }

  std::string detail(const std::string& ok_note) const {
    std::ostringstream out;
    if (failures_ == 0) {
      out << checks_ << " checks; " << ok_note;
      return out.str();
    }
    out << failures_ << "/" << checks_ << " checks failed:";
    for (const auto& n : notes_) out << " [" << n << "]";
    return out.str();
  }

 private:
  std::int64_t checks_ = 0;
  std::int64_t failures_ = 0;
  std::vector<std::string> notes_;
};

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline SystemState state_from_flat(int n, int d, const std::vector<double>& flat) {
  SystemState s(n, d);
  for (int i = 0; i < n; ++i) {
    auto xi = s.opinion(i);
    for (int k = 0; k < d; ++k)
      xi[static_cast<std::size_t>(k)] = flat[static_cast<std::size_t>(i) * d + k];
  }
  return s;
}

// Descending bounds with a guaranteed spread between first and last agent.
inline std::vector<double> random_profile(SeededStream& rng, int n, double lo_max, double hi_max) {
  const double r1 = lo_max + rng.next_unit() * (hi_max - lo_max);
  const double rn = 0.05 + rng.next_unit() * (0.5 * r1 - 0.05);
  std::vector<double> b(static_cast<std::size_t>(n));
  b.front() = r1;
  b.back() = rn;
  for (int i = 1; i + 1 < n; ++i)
    b[static_cast<std::size_t>(i)] = rn + rng.next_unit() * (r1 - rn);
  std::sort(b.begin(), b.end(), std::greater<>());
  return b;
}

}  // namespace detail

// Replays a merge schedule and validates the construction's step structure:
// halving positions against the closed form, strict diameter decrements per
// phase, target immobility, and the final collapse.
struct MergeReplayReport {
  bool ok = true;
  std::int64_t phases = 0;
  std::int64_t halvings = 0;
  std::string note;  // first violation
};

inline MergeReplayReport check_merge_schedule(const SystemState& initial,
                                              const ConfidenceProfile& profile,
                                              std::vector<int> alpha, std::vector<int> beta,
                                              const std::vector<EdgeSet>& schedule) {
  MergeReplayReport report;
  auto fail = [&report](const std::string& why) {
    if (report.ok) {
      report.ok = false;
      report.note = why;
    }
  };

  std::sort(alpha.begin(), alpha.end());
  std::sort(beta.begin(), beta.end());
  std::vector<int> members(alpha.size() + beta.size());
  std::merge(alpha.begin(), alpha.end(), beta.begin(), beta.end(), members.begin());

  const int n = initial.agent_count();
  const int lead = alpha.front();
  const int alpha_tail = alpha.back();
  const int beta_tail = beta.back();
  const double r_min = std::min(profile.bound(alpha_tail), profile.bound(beta_tail));
  const auto J = static_cast<std::int64_t>(alpha.size());
  const auto K = static_cast<std::int64_t>(beta.size());
  const double d0 = subset_diameter(initial, members);
  const MergeBound predicted = compute_S_T(J, K, d0, r_min);

  SystemState state = initial;
  bool toward_beta = true;
  bool collapsed = false;
  double phase_start_diam = d0;
  std::vector<double> shuttle_start(state.opinion(lead).begin(), state.opinion(lead).end());
  std::vector<double> target_pos;
  int halvings_in_phase = 0;

  for (std::size_t s = 0; s < schedule.size(); ++s) {
    if (collapsed) {
      fail("schedule continues after the merge collapsed at step " + std::to_string(s));
      break;
    }
    const double diam = subset_diameter(state, members);
    const int target = toward_beta ? beta_tail : alpha_tail;
    const double gap = distance(state.opinion(lead), state.opinion(target));

    enum { kHalve, kStar, kClique } move;
    EdgeSet expected(n);
    std::vector<int> star;
    if (diam <= r_min) {
      move = kClique;
      expected = EdgeSet::complete_within(n, members);
    } else if (gap > profile.bound(target)) {
      move = kHalve;
      expected = EdgeSet::mutual_pair(n, lead, target);
    } else {
      move = kStar;
      if (toward_beta) {
        star.push_back(lead);
        star.insert(star.end(), beta.begin(), beta.end());
      } else {
        star = alpha;
      }
      expected = EdgeSet::complete_within(n, star);
    }
    if (!(schedule[s] == expected)) {
      fail("step " + std::to_string(s) + " edge set deviates from the construction");
      break;
    }

    const SystemState next = step(state, profile, schedule[s]);

    if (move == kHalve) {
      if (halvings_in_phase == 0) {
        const auto tp = state.opinion(target);
        target_pos.assign(tp.begin(), tp.end());
        const auto sp = state.opinion(lead);
        shuttle_start.assign(sp.begin(), sp.end());
      }
      ++halvings_in_phase;
      ++report.halvings;
      const double scale = std::ldexp(1.0, -halvings_in_phase);
      const auto moved = next.opinion(lead);
      for (int k = 0; k < state.dimension(); ++k) {
        const double want =
            target_pos[static_cast<std::size_t>(k)] +
            (shuttle_start[static_cast<std::size_t>(k)] - target_pos[static_cast<std::size_t>(k)]) *
                scale;
        if (!detail::close_rel(moved[static_cast<std::size_t>(k)], want, 1e-12))
          fail("halving " + std::to_string(report.halvings) + " strays from the closed form");
      }
      if (!bitwise_equal(next.opinion(target), std::span<const double>(target_pos)))
        fail("halving moved its target at step " + std::to_string(s));
    } else if (move == kStar) {
      if (subset_diameter(next, star) != 0.0)
        fail("star at step " + std::to_string(s) + " left members apart");
      if (halvings_in_phase > predicted.halving_limit)
        fail("phase " + std::to_string(report.phases + 1) + " used " +
             std::to_string(halvings_in_phase) + " halvings, bound " +
             std::to_string(predicted.halving_limit));
      ++report.phases;
      const double need =
          toward_beta ? r_min / (2.0 * static_cast<double>(K + 1)) : r_min / (2.0 * static_cast<double>(J));
      const double diam_after = subset_diameter(next, members);
      if (!(diam_after < phase_start_diam - need))
        fail("phase " + std::to_string(report.phases) + " decrement below the guaranteed slack");
      phase_start_diam = diam_after;
      halvings_in_phase = 0;
      if (toward_beta && J == 1) collapsed = true;
      toward_beta = !toward_beta;
    } else {
      if (subset_diameter(next, members) != 0.0)
        fail("closing clique left members apart at step " + std::to_string(s));
      collapsed = true;
    }
    state = next;
  }

  if (!collapsed) fail("schedule ended before the merge collapsed");
  if (subset_diameter(state, members) != 0.0) fail("final state is not a single point");
  if (report.phases > predicted.phase_limit)
    fail("used " + std::to_string(report.phases) + " phases, bound " +
         std::to_string(predicted.phase_limit));
  if (static_cast<std::int64_t>(schedule.size()) > predicted.step_limit)
    fail("used " + std::to_string(schedule.size()) + " steps, bound " +
         std::to_string(predicted.step_limit));
  return report;
}

// --- criterion 1: closed-form values and the sharper-bound dominance sweep --

inline CheckResult check_formula_reproduction() {
  detail::Check c;

  c.require(detail::close_rel(compute_Tn(3, 1.0), 38.16465346877546, 1e-9), "T_3(1.0)");
  c.require(compute_Tn(3, 2.0) == 8.0, "T_3(2.0)");
  c.require(compute_Tn_star(3, 1.0) == 15.0, "T*_3(1.0)");
  c.require(compute_Tn_star(4, 1.0) == 30.0, "T*_4(1.0)");
  c.require(compute_Tn_star(3, 0.5) == 46.0, "T*_3(0.5)");
  c.require(floor_Tn(3, 0.7) == 86, "floor T_3(0.7)");
  for (int n = 3; n <= 8; ++n)
    c.require(compute_Tn_star(n, 2.0) == 3.0 * n - 5.0, "T*_n(2) = 3n-5 at n=" + std::to_string(n));

  const MergeBound a = compute_S_T(1, 1, 1.0, 0.5);
  c.require(a.phase_limit == 5 && a.halving_limit == 1 && a.step_limit == 11, "S,T(1,1,1,0.5)");
  const MergeBound b = compute_S_T(2, 1, 1.0, 0.3);
  c.require(b.phase_limit == 12 && b.halving_limit == 2 && b.step_limit == 37, "S,T(2,1,1,0.3)");

  c.require(tau_tail_bound(0, 37, 0.5) == 1.0, "tail at t=0");
  c.require(tau_tail_bound(37, 37, 0.5) == 1.0, "tail before the first full block");
  c.require(detail::close_rel(tau_tail_bound(38, 37, 0.5), 0.999999999992724, 1e-12), "tail(38,37,0.5)");
  c.require(detail::close_rel(tau_tail_bound(76, 37, 0.5), 0.9999999999854481, 1e-12), "tail(76,37,0.5)");
  for (std::int64_t t = 1; t <= 400; ++t)
    c.require(tau_tail_bound(t, 5, 0.25) <= tau_tail_bound(t - 1, 5, 0.25), "tail monotone");
  c.require(mse_envelope(0, 3, 0.7, 0.015625) == 12.0, "mse envelope at t=0");

  c.require(detail::close_rel(sphere_volume(1, 1.0), 2.0, 1e-12), "V_1(1)");
  c.require(detail::close_rel(sphere_volume(2, 1.0), 3.141592653589793, 1e-12), "V_2(1)");
  c.require(detail::close_rel(sphere_volume(3, 1.0), 4.1887902047863905, 1e-12), "V_3(1)");
  c.require(detail::close_rel(sphere_volume(2, 0.5), 0.7853981633974483, 1e-12), "V_2(0.5)");
  c.require(detail::close_rel(sphere_volume(3, 2.0), 33.510321638291124, 1e-12), "V_3(2)");

  for (int n = 3; n <= 100; ++n)
    for (const double r : {0.1, 0.5, 1.0, 1.5, 1.9, 2.0}) {
      const double coarse = compute_Tn(n, r);
      const double sharp = compute_Tn_star(n, r);
      c.require(sharp > 0.0 && sharp < coarse,
                "dominance at n=" + std::to_string(n) + " r=" + std::to_string(r));
    }

  CheckResult res;
  res.name = "formula-reproduction";
  res.passed = c.passed();
  res.detail = c.detail("values and dominance sweep n=3..100 match");
  return res;
}

// --- criterion 2: exhaustive subset enumeration matches delta exactly -------

inline CheckResult check_delta_exactness() {
  detail::Check c;

  for (const double p : {0.3, 0.5, 0.7}) {
    const auto model = InteractionModel::erdos_renyi(3, p);
    const auto report = verify_lowbound_exhaustive(model);
    c.require(report.min_matches_delta, "min != delta for p=" + std::to_string(p));
    c.require(report.total_near_one, "total != 1 for p=" + std::to_string(p));
    c.require(report.subset_count == 64, "subset count for p=" + std::to_string(p));
  }
  c.require(verify_lowbound_exhaustive(InteractionModel::erdos_renyi(3, 0.3)).min_subset == 63,
            "argmin subset for p=0.3 keeps all edges");
  c.require(verify_lowbound_exhaustive(InteractionModel::erdos_renyi(3, 0.7)).min_subset == 0,
            "argmin subset for p=0.7 drops all edges");
  c.require(delta_lower_bound(InteractionModel::erdos_renyi(3, 0.5)) == 0.015625, "delta er(0.5)");
  c.require(delta_lower_bound(InteractionModel::uniform_subset(3)) == 0.015625, "delta uniform");
  c.require(delta_lower_bound(InteractionModel::erdos_renyi(5, 0.5)) == 9.5367431640625e-07,
            "delta er_5(0.5)");

  const auto uni = verify_lowbound_exhaustive(InteractionModel::uniform_subset(3));
  c.require(uni.passed(), "uniform subset enumeration");

  std::vector<double> probs(9, 0.0);
  const double vals[6] = {0.12, 0.34, 0.56, 0.78, 0.9, 0.41};
  int v = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) probs[static_cast<std::size_t>(i) * 3 + j] = vals[v++];
  const auto pm = verify_lowbound_exhaustive(InteractionModel::pair_matrix(3, probs));
  c.require(pm.passed(), "pair matrix enumeration");

  CheckResult res;
  res.name = "delta-exactness";
  res.passed = c.passed();
  res.detail = c.detail("64-subset enumerations agree with the product bound bitwise");
  return res;
}

// --- criterion 3: every trial absorbs, dichotomy and absorbing probe hold ---

inline CheckResult check_convergence_battery(std::uint64_t seed) {
  detail::Check c;

  ExperimentConfig cfg;
  cfg.n = 5;
  cfg.d = 2;
  cfg.bounds = {1.5, 1.2, 0.9, 0.6, 0.3};
  cfg.model = InteractionModel::erdos_renyi(5, 0.5);
  cfg.eps_eq = 1e-9;
  cfg.trials = 500;
  cfg.max_steps = 100000;
  cfg.master_seed = seed;
  const auto records = run_experiment(cfg);

  std::int64_t tau_max = 0;
  for (const auto& r : records) {
    c.require(!r.capped, "trial " + std::to_string(r.trial_id) + " hit the step cap");
    if (r.capped) continue;
    tau_max = std::max(tau_max, r.tau);
    c.require(r.absorbing_ok, "trial " + std::to_string(r.trial_id) + " moved after absorbing");
    const SystemState fin = detail::state_from_flat(cfg.n, cfg.d, r.final_opinions);
    c.require(is_E1(fin, std::span<const double>(cfg.bounds), cfg.eps_eq),
              "trial " + std::to_string(r.trial_id) + " final state not absorbing");
    for (int i = 0; i < cfg.n; ++i)
      for (int j = i + 1; j < cfg.n; ++j) {
        const double gap = distance(fin.opinion(i), fin.opinion(j));
        const bool merged = gap <= cfg.eps_eq;
        const bool separated =
            gap > std::max(cfg.bounds[static_cast<std::size_t>(i)], cfg.bounds[static_cast<std::size_t>(j)]);
        c.require(merged != separated,
                  "trial " + std::to_string(r.trial_id) + " pair violates the dichotomy");
      }
  }

  CheckResult res;
  res.name = "convergence-dichotomy";
  res.passed = c.passed();
  res.detail = c.detail("500 trials absorbed, max tau " + std::to_string(tau_max));
  return res;
}

// --- criterion 4: empirical curves stay under the bounds at 3 sigma ---------

inline CheckResult check_dominance(std::uint64_t seed) {
  detail::Check c;

  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.d = 1;
  cfg.bounds = {0.7, 0.7, 0.7};
  cfg.model = InteractionModel::erdos_renyi(3, 0.5);
  cfg.eps_eq = 1e-9;
  cfg.trials = 10000;
  cfg.max_steps = 100000;
  cfg.master_seed = seed;
  cfg.decimate = 1;
  const auto records = run_experiment(cfg);

  bool all_absorbed = true;
  for (const auto& r : records) all_absorbed = all_absorbed && !r.capped;
  c.require(all_absorbed, "a trial hit the step cap");

  const double delta = delta_lower_bound(cfg.model);
  const std::int64_t horizon = floor_Tn(cfg.n, cfg.bounds.back());
  const double trials = static_cast<double>(cfg.trials);

  const auto survival = tau_survival_curve(records);
  c.require(survival.front().second == 1.0, "survival curve must start at 1");
  for (const auto& [t, s] : survival) {
    const double bound = tau_tail_bound(t, horizon, delta);
    const double se = std::sqrt(std::max(0.0, s * (1.0 - s)) / trials);
    c.require(s <= bound + 3.0 * se + 1e-12, "survival exceeds the tail bound at t=" + std::to_string(t));
  }

  const auto mse = mse_curve(records);
  c.require(mse.front().mean > 0.0, "mse curve degenerate at t=0");
  for (const auto& pt : mse) {
    const double env = mse_envelope(pt.t, cfg.n, cfg.bounds.back(), delta);
    c.require(pt.mean <= env + 3.0 * pt.std_error + 1e-12,
              "mse exceeds the envelope at t=" + std::to_string(pt.t));
  }

  CheckResult res;
  res.name = "bound-dominance";
  res.passed = c.passed();
  res.detail = c.detail("10000 trials under both envelopes, horizon " + std::to_string(horizon));
  return res;
}

// --- criterion 5: merge construction obeys its step bound and structure -----

inline CheckResult check_merge_bounds(std::uint64_t seed) {
  detail::Check c;
  SeededStream rng(seed, 555);

  for (int inst = 0; inst < 1000; ++inst) {
    const int J = 1 + static_cast<int>(rng.next() % 5);
    const int K = 1 + static_cast<int>(rng.next() % 5);
    const int d = 1 + static_cast<int>(rng.next() % 3);
    const int n = J + K;

    std::vector<int> order;
    for (int i = 1; i < n; ++i) order.push_back(i);
    for (std::size_t k = order.size(); k > 1; --k)
      std::swap(order[k - 1], order[rng.next() % k]);
    std::vector<int> alpha{0};
    alpha.insert(alpha.end(), order.begin(), order.begin() + (J - 1));
    std::vector<int> beta(order.begin() + (J - 1), order.end());
    std::sort(alpha.begin(), alpha.end());
    std::sort(beta.begin(), beta.end());

    const std::vector<double> bounds = detail::random_profile(rng, n, 0.6, 1.5);
    const ConfidenceProfile profile(bounds);
    const double r_min = bounds.back();
    const double r_max = bounds.front();
    const double d0 = r_max - (r_max - r_min) * std::max(rng.next_unit(), 1e-3);

    const std::vector<double> a = uniform_in_ball(rng, d, 0.5);
    const std::vector<double> dir = random_unit_vector(rng, d);
    SystemState state(n, d);
    for (int i = 0; i < n; ++i) {
      auto xi = state.opinion(i);
      const bool in_alpha = std::find(alpha.begin(), alpha.end(), i) != alpha.end();
      for (int k = 0; k < d; ++k)
        xi[static_cast<std::size_t>(k)] =
            a[static_cast<std::size_t>(k)] +
            (in_alpha ? 0.0 : d0 * dir[static_cast<std::size_t>(k)]);
    }

    std::vector<int> members(alpha.size() + beta.size());
    std::merge(alpha.begin(), alpha.end(), beta.begin(), beta.end(), members.begin());

    const auto result = merge_schedule(state, profile, alpha, beta);
    c.require(result.steps_used <= result.predicted.step_limit,
              "instance " + std::to_string(inst) + " exceeded its step bound");
    c.require(subset_diameter(result.merged, members) == 0.0,
              "instance " + std::to_string(inst) + " union not merged to a point");
    const auto replay = check_merge_schedule(state, profile, alpha, beta, result.schedule);
    c.require(replay.ok, "instance " + std::to_string(inst) + ": " + replay.note);
  }

  CheckResult res;
  res.name = "merge-step-bounds";
  res.passed = c.passed();
  res.detail = c.detail("1000 random merges within S(T+1)+1 with valid structure");
  return res;
}

// --- criterion 6: scheduler terminal times stay under the sharper bound -----

inline CheckResult check_scheduler_bounds(std::uint64_t seed) {
  detail::Check c;
  SeededStream rng(seed, 666);

  for (int inst = 0; inst < 200; ++inst) {
    const int n = 3 + inst % 6;
    const int d = 1 + inst % 3;
    const std::vector<double> bounds = detail::random_profile(rng, n, 0.4, 1.8);
    const ConfidenceProfile profile(bounds);

    SystemState state(n, d);
    for (int i = 0; i < n; ++i) {
      const auto x = uniform_in_ball(rng, d, 1.0);
      std::copy(x.begin(), x.end(), state.opinion(i).begin());
    }

    const ControlRun run = algorithm1_run(state, profile, 0.0);
    const double limit = compute_Tn_star(n, profile.smallest());
    c.require(static_cast<double>(run.terminal_time) <= limit,
              "instance " + std::to_string(inst) + " terminal above the bound");
    c.require(is_E1(run.final_state, profile, 0.0),
              "instance " + std::to_string(inst) + " final state not absorbing");

    for (std::size_t t = 0; t + 1 < run.partition_history.size(); ++t) {
      const auto& fine = run.partition_history[t];
      const auto& coarse = run.partition_history[t + 1];
      for (const auto& part : fine) {
        bool contained = false;
        for (const auto& sup : coarse)
          if (std::includes(sup.begin(), sup.end(), part.begin(), part.end())) {
            contained = true;
            break;
          }
        c.require(contained, "instance " + std::to_string(inst) + " partition not coarsening at t=" +
                                 std::to_string(t));
      }
    }

    c.require(run.task_edges.size() == run.schedule.size(),
              "instance " + std::to_string(inst) + " bookkeeping length mismatch");
    for (std::size_t t = 0; t < run.task_edges.size(); ++t) {
      EdgeSet combined(n);
      std::vector<bool> touched(static_cast<std::size_t>(n), false);
      bool disjoint = true;
      for (const auto& e : run.task_edges[t]) {
        std::vector<bool> mine(static_cast<std::size_t>(n), false);
        for (const auto& [i, j] : e.edges()) mine[static_cast<std::size_t>(i)] = mine[static_cast<std::size_t>(j)] = true;
        for (int i = 0; i < n; ++i)
          if (mine[static_cast<std::size_t>(i)] && touched[static_cast<std::size_t>(i)]) disjoint = false;
        for (int i = 0; i < n; ++i)
          if (mine[static_cast<std::size_t>(i)]) touched[static_cast<std::size_t>(i)] = true;
        combined.merge(e);
      }
      c.require(disjoint, "instance " + std::to_string(inst) + " tasks overlap at t=" + std::to_string(t));
      c.require(combined == run.schedule[t],
                "instance " + std::to_string(inst) + " schedule differs from the task union at t=" +
                    std::to_string(t));
    }
  }

  CheckResult res;
  res.name = "scheduler-terminal-bounds";
  res.passed = c.passed();
  res.detail = c.detail("200 runs under T*_n with coarsening partitions and disjoint tasks");
  return res;
}

// --- criterion 7: generated clusters replay identically as subsystems -------

inline CheckResult check_subsystem_consistency(std::uint64_t seed) {
  detail::Check c;
  SeededStream rng(seed, 777);
  int events = 0;

  for (int inst = 0; inst < 50; ++inst) {
    const int n = 3 + inst % 6;
    const int d = 1 + inst % 2;
    const std::vector<double> bounds = detail::random_profile(rng, n, 0.5, 1.6);
    const ConfidenceProfile profile(bounds);

    SystemState state(n, d);
    for (int i = 0; i < n; ++i) {
      const auto x = uniform_in_ball(rng, d, 1.0);
      std::copy(x.begin(), x.end(), state.opinion(i).begin());
    }

    const ControlRun run = algorithm1_run(state, profile, 0.0);
    for (const auto& event : run.merges) {
      ++events;
      const ControlRun sub = run_subsystem(state, profile, event.agents, 0.0);
      c.require(sub.terminal_time == event.generation_time,
                "instance " + std::to_string(inst) + " cluster of " +
                    std::to_string(event.agents.size()) + " agents replays at " +
                    std::to_string(sub.terminal_time) + " instead of " +
                    std::to_string(event.generation_time));
      std::vector<int> everyone(event.agents.size());
      for (std::size_t k = 0; k < everyone.size(); ++k) everyone[k] = static_cast<int>(k);
      c.require(subset_diameter(sub.final_state, everyone) == 0.0,
                "instance " + std::to_string(inst) + " subsystem did not reach consensus");
    }
  }

  CheckResult res;
  res.name = "subsystem-consistency";
  res.passed = c.passed();
  res.detail = c.detail(std::to_string(events) + " merge events replay at their generation times");
  return res;
}

// --- criterion 8: a bound of 2 forces consensus from the unit ball ----------

inline CheckResult check_guaranteed_consensus(std::uint64_t seed) {
  detail::Check c;

  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.d = 2;
  cfg.bounds = {2.0, 0.4, 0.3};
  cfg.model = InteractionModel::erdos_renyi(3, 0.5);
  cfg.eps_eq = 1e-9;
  cfg.trials = 1000;
  cfg.max_steps = 100000;
  cfg.master_seed = seed;

  const Corollary1Report report = corollary1_experiment(cfg);
  c.require(report.all_consensus, "a trial ended without consensus");
  c.require(report.consensus_trials == 1000, "consensus count " + std::to_string(report.consensus_trials));

  CheckResult res;
  res.name = "guaranteed-consensus";
  res.passed = c.passed();
  res.detail = c.detail("1000/1000 consensus, tau in [" + std::to_string(report.tau_min) + "," +
                        std::to_string(report.tau_max) + "]");
  return res;
}

// --- criterion 9: the counterexample stays separated with r_1 < 2 -----------

inline CheckResult check_persistent_separation(std::uint64_t seed) {
  detail::Check c;
  std::uint64_t stream = 901;

  for (const double r1 : {0.5, 1.0, 1.5}) {
    for (int d = 1; d <= 3; ++d) {
      const int n = 4;
      const std::vector<double> bounds = {r1, 0.6 * r1, 0.55 * r1, 0.5 * r1};
      SeededStream init_rng(seed, stream++);
      SeededStream edge_rng(seed, stream++);
      SystemState state = corollary2_counterexample_init(n, d, r1, init_rng);
      const std::vector<double> leader(state.opinion(0).begin(), state.opinion(0).end());
      const auto model = InteractionModel::erdos_renyi(n, 0.5);

      SystemState scratch(n, d);
      std::int64_t first_violation = -1;
      for (std::int64_t t = 1; t <= 10000 && first_violation < 0; ++t) {
        const EdgeSet e = sample_edge_set(model, edge_rng);
        step_into(state, std::span<const double>(bounds), e, scratch);
        std::swap(state, scratch);
        if (!bitwise_equal(state.opinion(0), std::span<const double>(leader))) first_violation = t;
        for (int i = 1; i < n && first_violation < 0; ++i)
          if (!(distance(state.opinion(0), state.opinion(i)) > r1)) first_violation = t;
      }
      c.require(first_violation < 0, "r1=" + std::to_string(r1) + " d=" + std::to_string(d) +
                                         " separation broke at t=" + std::to_string(first_violation));
    }
  }

  CheckResult res;
  res.name = "persistent-separation";
  res.passed = c.passed();
  res.detail = c.detail("9 configurations hold separation for 10000 steps");
  return res;
}

// --- criterion 10: core invariants on randomized instances ------------------

inline CheckResult check_core_invariants(std::uint64_t seed) {
  detail::Check c;
  SeededStream rng(seed, 1010);
  constexpr double tol = 1e-12;

  // Hull containment and norm contraction under random edge sets.
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 3 + static_cast<int>(rng.next() % 4);
    const int d = 1 + static_cast<int>(rng.next() % 3);
    const std::vector<double> bounds = detail::random_profile(rng, n, 0.3, 1.5);
    SystemState state(n, d);
    for (int i = 0; i < n; ++i) {
      const auto x = uniform_in_ball(rng, d, 1.0);
      std::copy(x.begin(), x.end(), state.opinion(i).begin());
    }
    EdgeSet e(n);
    for (std::int64_t k = 0; k < EdgeSet::pair_count(n); ++k)
      if (rng.next_unit() < 0.5) {
        const auto [i, j] = EdgeSet::edge_at(n, k);
        e.insert(i, j);
      }
    const SystemState next = step(state, std::span<const double>(bounds), e);

    double before = 0.0, after = 0.0;
    for (int i = 0; i < n; ++i) {
      before = std::max(before, norm(state.opinion(i)));
      after = std::max(after, norm(next.opinion(i)));
    }
    c.require(after <= before + tol, "norm grew at instance " + std::to_string(inst));

    for (int dir = 0; dir < 5; ++dir) {
      const auto u = random_unit_vector(rng, d);
      double lo = 1e300, hi = -1e300, lo2 = 1e300, hi2 = -1e300;
      for (int i = 0; i < n; ++i) {
        double p = 0.0, q = 0.0;
        for (int k = 0; k < d; ++k) {
          p += u[static_cast<std::size_t>(k)] * state.opinion(i)[static_cast<std::size_t>(k)];
          q += u[static_cast<std::size_t>(k)] * next.opinion(i)[static_cast<std::size_t>(k)];
        }
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        lo2 = std::min(lo2, q);
        hi2 = std::max(hi2, q);
      }
      c.require(lo2 >= lo - tol && hi2 <= hi + tol,
                "hull projection grew at instance " + std::to_string(inst));
    }
  }

  // Equivariance under rotation plus translation, away from thresholds.
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 3 + static_cast<int>(rng.next() % 3);
    const int d = 1 + static_cast<int>(rng.next() % 3);
    const std::vector<double> bounds = detail::random_profile(rng, n, 0.3, 1.2);

    SystemState state(n, d);
    bool safe = false;
    for (int attempt = 0; attempt < 200 && !safe; ++attempt) {
      for (int i = 0; i < n; ++i) {
        const auto x = uniform_in_ball(rng, d, 1.0);
        std::copy(x.begin(), x.end(), state.opinion(i).begin());
      }
      safe = true;
      for (int i = 0; i < n && safe; ++i)
        for (int j = 0; j < n && safe; ++j)
          if (i != j &&
              std::abs(distance(state.opinion(i), state.opinion(j)) -
                       bounds[static_cast<std::size_t>(i)]) < 1e-6)
            safe = false;
    }
    if (!safe) continue;

    EdgeSet e(n);
    for (std::int64_t k = 0; k < EdgeSet::pair_count(n); ++k)
      if (rng.next_unit() < 0.6) {
        const auto [i, j] = EdgeSet::edge_at(n, k);
        e.insert(i, j);
      }

    // Random rotation by Gram-Schmidt on a gaussian matrix.
    std::vector<std::vector<double>> Q(static_cast<std::size_t>(d),
                                       std::vector<double>(static_cast<std::size_t>(d)));
    for (auto& row : Q) {
      bool independent = false;
      while (!independent) {
        fill_gaussian(rng, row);
        for (std::size_t prev = 0; prev < static_cast<std::size_t>(&row - Q.data()); ++prev) {
          double dot = 0.0;
          for (int k = 0; k < d; ++k) dot += row[static_cast<std::size_t>(k)] * Q[prev][static_cast<std::size_t>(k)];
          for (int k = 0; k < d; ++k) row[static_cast<std::size_t>(k)] -= dot * Q[prev][static_cast<std::size_t>(k)];
        }
        const double len = norm(row);
        if (len > 1e-3) {
          for (double& v : row) v /= len;
          independent = true;
        }
      }
    }
    std::vector<double> shift(static_cast<std::size_t>(d));
    fill_gaussian(rng, shift);

    SystemState moved(n, d);
    for (int i = 0; i < n; ++i) {
      auto yi = moved.opinion(i);
      const auto xi = state.opinion(i);
      for (int r = 0; r < d; ++r) {
        double acc = shift[static_cast<std::size_t>(r)];
        for (int k = 0; k < d; ++k)
          acc += Q[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] * xi[static_cast<std::size_t>(k)];
        yi[static_cast<std::size_t>(r)] = acc;
      }
    }

    const SystemState stepped = step(state, std::span<const double>(bounds), e);
    const SystemState moved_stepped = step(moved, std::span<const double>(bounds), e);
    for (int i = 0; i < n; ++i) {
      const auto xi = stepped.opinion(i);
      const auto yi = moved_stepped.opinion(i);
      for (int r = 0; r < d; ++r) {
        double acc = shift[static_cast<std::size_t>(r)];
        for (int k = 0; k < d; ++k)
          acc += Q[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] * xi[static_cast<std::size_t>(k)];
        c.require(std::abs(acc - yi[static_cast<std::size_t>(r)]) <= 1e-12 * std::max(1.0, std::abs(acc)),
                  "rotation equivariance failed at instance " + std::to_string(inst));
      }
    }
  }

  // Equivariance under relabeling, including unsorted bounds.
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 3 + static_cast<int>(rng.next() % 4);
    const int d = 1 + static_cast<int>(rng.next() % 2);
    std::vector<double> bounds(static_cast<std::size_t>(n));
    for (double& b : bounds) b = 0.2 + rng.next_unit() * 1.3;
    SystemState state(n, d);
    for (int i = 0; i < n; ++i) {
      const auto x = uniform_in_ball(rng, d, 1.0);
      std::copy(x.begin(), x.end(), state.opinion(i).begin());
    }
    EdgeSet e(n);
    for (std::int64_t k = 0; k < EdgeSet::pair_count(n); ++k)
      if (rng.next_unit() < 0.5) {
        const auto [i, j] = EdgeSet::edge_at(n, k);
        e.insert(i, j);
      }

    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.next() % k]);

    SystemState pstate(n, d);
    std::vector<double> pbounds(static_cast<std::size_t>(n));
    EdgeSet pe(n);
    for (int i = 0; i < n; ++i) {
      const auto xi = state.opinion(i);
      std::copy(xi.begin(), xi.end(), pstate.opinion(perm[static_cast<std::size_t>(i)]).begin());
      pbounds[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
          bounds[static_cast<std::size_t>(i)];
    }
    for (const auto& [i, j] : e.edges())
      pe.insert(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);

    const SystemState stepped = step(state, std::span<const double>(bounds), e);
    const SystemState pstepped = step(pstate, std::span<const double>(pbounds), pe);
    for (int i = 0; i < n; ++i) {
      const auto a = stepped.opinion(i);
      const auto b = pstepped.opinion(perm[static_cast<std::size_t>(i)]);
      for (int k = 0; k < d; ++k)
        c.require(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) <=
                      1e-12 * std::max(1.0, std::abs(a[static_cast<std::size_t>(k)])),
                  "permutation equivariance failed at instance " + std::to_string(inst));
    }
  }

  // Determinism and stream reproducibility.
  {
    ExperimentConfig cfg;
    cfg.n = 4;
    cfg.d = 2;
    cfg.bounds = {1.0, 0.8, 0.5, 0.4};
    cfg.model = InteractionModel::erdos_renyi(4, 0.5);
    cfg.master_seed = seed;
    cfg.trials = 3;
    const auto once = run_experiment(cfg);
    const auto twice = run_experiment(cfg);
    c.require(once == twice, "run_experiment not reproducible");

    SeededStream s1(seed, 42), s2(seed, 42);
    bool same = true;
    for (int k = 0; k < 50; ++k)
      same = same && sample_edge_set(cfg.model, s1) == sample_edge_set(cfg.model, s2);
    c.require(same, "edge stream not reproducible");
  }

  // Absorbing exactness over every edge set of the frozen 3-agent state.
  {
    const SystemState frozen = SystemState::from_opinions({{0.0}, {0.0}, {1.0}});
    const std::vector<double> bounds = {0.5, 0.5, 0.5};
    c.require(is_E1(frozen, std::span<const double>(bounds), 0.0), "frozen state must be absorbing");
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
      EdgeSet e(3);
      for (std::int64_t k = 0; k < 6; ++k)
        if (mask >> k & 1u) {
          const auto [i, j] = EdgeSet::edge_at(3, k);
          e.insert(i, j);
        }
      const SystemState next = step(frozen, std::span<const double>(bounds), e);
      c.require(next.same_opinions(frozen), "absorbing state moved under mask " + std::to_string(mask));
    }
  }

  // is_E1 agrees with an empty connection list.
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 3 + static_cast<int>(rng.next() % 3);
    const int d = 1 + static_cast<int>(rng.next() % 2);
    const std::vector<double> bounds = detail::random_profile(rng, n, 0.3, 1.2);
    SystemState state(n, d);
    for (int i = 0; i < n; ++i) {
      const auto x = uniform_in_ball(rng, d, 1.5);
      std::copy(x.begin(), x.end(), state.opinion(i).begin());
    }
    const auto part = detect_clusters(state, std::span<const double>(bounds), 0.0);
    c.require(is_E1(state, std::span<const double>(bounds), 0.0) == part.connections.empty(),
              "absorbing test disagrees with cluster connections at instance " + std::to_string(inst));
  }

  CheckResult res;
  res.name = "core-invariants";
  res.passed = c.passed();
  res.detail = c.detail("hull, equivariance, determinism, and absorption checks hold at 1e-12");
  return res;
}

inline std::vector<CheckResult> run_battery(std::uint64_t seed = kDefaultSeed) {
  using clock = std::chrono::steady_clock;
  std::vector<CheckResult> results;
  const auto timed = [&results](CheckResult (*fn)(std::uint64_t), std::uint64_t s) {
    const auto start = clock::now();
    CheckResult r = fn(s);
    r.seconds = std::chrono::duration<double>(clock::now() - start).count();
    results.push_back(std::move(r));
  };
  const auto timed0 = [&results](CheckResult (*fn)()) {
    const auto start = clock::now();
    CheckResult r = fn();
    r.seconds = std::chrono::duration<double>(clock::now() - start).count();
    results.push_back(std::move(r));
  };

  timed0(&check_formula_reproduction);
  timed0(&check_delta_exactness);
  timed(&check_convergence_battery, seed);
  timed(&check_dominance, seed);
  timed(&check_merge_bounds, seed);
  timed(&check_scheduler_bounds, seed);
  timed(&check_subsystem_consistency, seed);
  timed(&check_guaranteed_consensus, seed);
  timed(&check_persistent_separation, seed);
  timed(&check_core_invariants, seed);
  return results;
}

}  // namespace ribc::verify
