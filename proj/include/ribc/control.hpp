#pragma once

// Controlled cluster merging. MergeTask drives one pair of co-located
// clusters together through alternating approach-and-star phases of a single
// shuttle agent; the scheduler below activates such tasks pairwise until the
// whole system is absorbed, never exceeding the closed-form step bounds.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ribc/bounds.hpp"
#include "ribc/opinion.hpp"

namespace ribc {

// One two-cluster merge. alpha must contain the smallest agent index of the
// union; with nonincreasing confidence bounds that makes alpha's first member
// the widest observer, which is what lets it shuttle between the groups.
//
// Per step, call next_edges() to obtain the control input, apply one global
// step, then report the result through on_step_applied().
class MergeTask {
 public:
  MergeTask(std::vector<int> alpha, std::vector<int> beta, const SystemState& state,
            const ConfidenceProfile& profile)
      : alpha_(std::move(alpha)), beta_(std::move(beta)) {
    std::sort(alpha_.begin(), alpha_.end());
    std::sort(beta_.begin(), beta_.end());
    if (alpha_.empty() || beta_.empty())
      throw std::invalid_argument("merge task needs two nonempty clusters");
    union_.resize(alpha_.size() + beta_.size());
    std::merge(alpha_.begin(), alpha_.end(), beta_.begin(), beta_.end(), union_.begin());
    for (std::size_t k = 0; k + 1 < union_.size(); ++k)
      if (union_[k] == union_[k + 1])
        throw std::invalid_argument("merge task clusters must be disjoint");
    if (union_.front() < 0 || union_.back() >= state.agent_count())
      throw std::out_of_range("merge task agent out of range");
    if (profile.size() != state.agent_count())
      throw std::invalid_argument("profile must match the agent count");
    if (alpha_.front() > beta_.front())
      throw std::invalid_argument("alpha must contain the smallest agent index of the union");

    if (subset_diameter(state, alpha_) != 0.0 || subset_diameter(state, beta_) != 0.0)
      throw std::invalid_argument("merge task clusters must each be exactly co-located");

    lead_ = alpha_.front();
    alpha_tail_ = alpha_.back();
    beta_tail_ = beta_.back();
    r_min_ = std::min(profile.bound(alpha_tail_), profile.bound(beta_tail_));

    const double d0 = distance(state.opinion(lead_), state.opinion(beta_.front()));
    if (d0 == 0.0) throw std::invalid_argument("merge task clusters must be distinct points");
    if (d0 > profile.bound(lead_))
      throw std::invalid_argument("merge task clusters are not connected");
    predicted_ = compute_S_T(static_cast<std::int64_t>(alpha_.size()),
                             static_cast<std::int64_t>(beta_.size()), d0, r_min_);
  }

  // Control input for the upcoming step.
  EdgeSet next_edges(const SystemState& state, const ConfidenceProfile& profile) {
    if (finished_) throw std::logic_error("merge task already finished");
    if (pending_ != Move::kNone)
      throw std::logic_error("next_edges called twice without on_step_applied");
    const int n = state.agent_count();

    if (subset_diameter(state, union_) <= r_min_) {
      require_star_admissible(state, profile, union_);
      pending_ = Move::kClique;
      return EdgeSet::complete_within(n, union_);
    }

    const int target = toward_beta_ ? beta_tail_ : alpha_tail_;
    const double gap = distance(state.opinion(lead_), state.opinion(target));
    if (gap > profile.bound(target)) {
      if (gap > profile.bound(lead_))
        throw std::logic_error("shuttle lost sight of its target; merge bookkeeping is broken");
      const auto xt = state.opinion(target);
      held_target_.assign(xt.begin(), xt.end());
      pending_ = Move::kHalve;
      return EdgeSet::mutual_pair(n, lead_, target);
    }

    star_.clear();
    if (toward_beta_) {
      star_.push_back(lead_);
      star_.insert(star_.end(), beta_.begin(), beta_.end());
    } else {
      star_ = alpha_;
    }
    require_star_admissible(state, profile, star_);
    pending_ = Move::kStar;
    return EdgeSet::complete_within(n, star_);
  }

  // Observe the state the scheduled step produced.
  void on_step_applied(const SystemState& state, const ConfidenceProfile& profile) {
    (void)profile;
    if (pending_ == Move::kNone)
      throw std::logic_error("on_step_applied without a pending move");
    ++steps_;
    switch (pending_) {
      case Move::kHalve: {
        const int target = toward_beta_ ? beta_tail_ : alpha_tail_;
        if (!bitwise_equal(state.opinion(target), held_target_))
          throw std::logic_error("halving moved its target; merge bookkeeping is broken");
        break;
      }
      case Move::kStar:
        if (subset_diameter(state, star_) != 0.0)
          throw std::logic_error("star step left its members apart; merge bookkeeping is broken");
        ++phases_;
        if (toward_beta_ && alpha_.size() == 1) {
          finish(state);
        } else {
          toward_beta_ = !toward_beta_;
        }
        break;
      case Move::kClique:
        finish(state);
        break;
      case Move::kNone:
        break;
    }
    pending_ = Move::kNone;
  }

  bool finished() const { return finished_; }
  std::int64_t steps_used() const { return steps_; }
  std::int64_t phases_used() const { return phases_; }
  const MergeBound& predicted() const { return predicted_; }
  const std::vector<int>& alpha() const { return alpha_; }
  const std::vector<int>& beta() const { return beta_; }
  const std::vector<int>& merged_agents() const { return union_; }

 private:
  enum class Move { kNone, kHalve, kStar, kClique };

  void finish(const SystemState& state) {
    if (subset_diameter(state, union_) != 0.0)
      throw std::logic_error("merge finished with members apart; merge bookkeeping is broken");
    finished_ = true;
  }

  static void require_star_admissible(const SystemState& state, const ConfidenceProfile& profile,
                                      const std::vector<int>& members) {
    for (int i : members)
      for (int j : members)
        if (i != j && distance(state.opinion(i), state.opinion(j)) > profile.bound(i))
          throw std::logic_error("planned star contains an inadmissible pair");
  }

  std::vector<int> alpha_, beta_, union_;
  int lead_ = 0, alpha_tail_ = 0, beta_tail_ = 0;
  double r_min_ = 0.0;
  MergeBound predicted_{};
  bool toward_beta_ = true;
  bool finished_ = false;
  Move pending_ = Move::kNone;
  std::vector<int> star_;
  std::vector<double> held_target_;
  std::int64_t steps_ = 0;
  std::int64_t phases_ = 0;
};

struct MergeScheduleResult {
  std::vector<EdgeSet> schedule;
  SystemState merged;
  std::int64_t steps_used;
  MergeBound predicted;
};

// Drive one merge task to completion and return the edge sets it used.
inline MergeScheduleResult merge_schedule(const SystemState& state,
                                          const ConfidenceProfile& profile, MergeTask task) {
  SystemState current = state;
  SystemState scratch(state.agent_count(), state.dimension());
  std::vector<EdgeSet> schedule;
  const std::int64_t guard = 4 * task.predicted().step_limit + 16;
  while (!task.finished()) {
    EdgeSet e = task.next_edges(current, profile);
    schedule.push_back(e);
    step_into(current, std::span<const double>(profile.bounds()), e, scratch);
    std::swap(current, scratch);
    task.on_step_applied(current, profile);
    if (static_cast<std::int64_t>(schedule.size()) > guard)
      throw std::logic_error("merge exceeded its safety guard; merge bookkeeping is broken");
  }
  return {std::move(schedule), std::move(current), task.steps_used(), task.predicted()};
}

inline MergeScheduleResult merge_schedule(const SystemState& state,
                                          const ConfidenceProfile& profile, std::vector<int> alpha,
                                          std::vector<int> beta) {
  MergeTask task(std::move(alpha), std::move(beta), state, profile);
  return merge_schedule(state, profile, std::move(task));
}

struct MergeEvent {
  std::vector<int> agents;            // the generated cluster, ascending
  std::int64_t generation_time;       // steps from the run's initial state
};

struct ControlRun {
  std::vector<EdgeSet> schedule;                  // union control input per step
  std::vector<std::vector<EdgeSet>> task_edges;   // per step, each active task's own edges
  std::int64_t terminal_time;
  SystemState final_state;
  std::vector<MergeEvent> merges;
  std::vector<std::vector<std::vector<int>>> partition_history;  // per time 0..terminal
};

// Scheduler: activate connected cluster pairs (lowest first index first),
// advance all active merges in one synchronized step per round, retire
// finished merges as new clusters, stop when the state is absorbing.
inline ControlRun algorithm1_run(const SystemState& initial, const ConfidenceProfile& profile,
                                 double eps_eq = 0.0) {
  if (profile.size() != initial.agent_count())
    throw std::invalid_argument("profile must match the agent count");
  const int n = initial.agent_count();

  struct Part {
    std::vector<int> agents;  // ascending
    int task = -1;            // slot into `tasks` while the part is mid-merge
  };
  std::vector<Part> parts;
  for (auto& cluster : detect_clusters(initial, profile, eps_eq).clusters)
    parts.push_back({std::move(cluster), -1});

  std::vector<std::optional<MergeTask>> tasks;

  SystemState state = initial;
  SystemState scratch(n, initial.dimension());

  std::vector<EdgeSet> schedule;
  std::vector<std::vector<EdgeSet>> task_edges;
  std::vector<MergeEvent> merges;
  std::vector<std::vector<std::vector<int>>> history;

  auto snapshot = [&]() {
    std::vector<std::vector<int>> snap;
    snap.reserve(parts.size());
    for (const auto& p : parts) snap.push_back(p.agents);
    std::sort(snap.begin(), snap.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    history.push_back(std::move(snap));
  };

  auto connected = [&](const Part& a, const Part& b) {
    double reach = 0.0;
    for (int i : a.agents) reach = std::max(reach, profile.bound(i));
    for (int i : b.agents) reach = std::max(reach, profile.bound(i));
    return distance(state.opinion(a.agents.front()), state.opinion(b.agents.front())) <= reach;
  };

  const double rn_eff = std::min(profile.smallest(), 2.0);
  const std::int64_t cap =
      10 * static_cast<std::int64_t>(std::ceil(compute_Tn(std::max(n, 3), rn_eff))) + 10;

  std::int64_t t = 0;
  snapshot();
  while (!is_E1(state, profile, eps_eq)) {
    // Activate merge tasks while two non-activated clusters stay connected.
    while (true) {
      int ai = -1, bi = -1;
      for (std::size_t p = 0; p < parts.size(); ++p) {
        if (parts[p].task >= 0) continue;
        for (std::size_t q = 0; q < parts.size(); ++q) {
          if (q == p || parts[q].task >= 0) continue;
          if (!connected(parts[p], parts[q])) continue;
          if (ai < 0 || parts[p].agents.front() < parts[static_cast<std::size_t>(ai)].agents.front()) {
            ai = static_cast<int>(p);
            bi = -1;
          }
          if (static_cast<int>(p) == ai &&
              (bi < 0 || parts[q].agents.front() < parts[static_cast<std::size_t>(bi)].agents.front()))
            bi = static_cast<int>(q);
        }
      }
      if (ai < 0) break;
      auto& pa = parts[static_cast<std::size_t>(ai)];
      auto& pb = parts[static_cast<std::size_t>(bi)];
      tasks.emplace_back(MergeTask(pa.agents, pb.agents, state, profile));
      Part merged;
      merged.agents.resize(pa.agents.size() + pb.agents.size());
      std::merge(pa.agents.begin(), pa.agents.end(), pb.agents.begin(), pb.agents.end(),
                 merged.agents.begin());
      merged.task = static_cast<int>(tasks.size()) - 1;
      parts.erase(parts.begin() + std::max(ai, bi));
      parts.erase(parts.begin() + std::min(ai, bi));
      parts.push_back(std::move(merged));
    }

    // One synchronized step of all active merges. Their agent sets are
    // disjoint, so the union input drives each merge independently.
    std::vector<EdgeSet> current_edges;
    EdgeSet combined(n);
    for (auto& p : parts) {
      if (p.task < 0) continue;
      EdgeSet e = tasks[static_cast<std::size_t>(p.task)]->next_edges(state, profile);
      combined.merge(e);
      current_edges.push_back(std::move(e));
    }
    if (current_edges.empty())
      throw std::logic_error("state not absorbing yet no merge can act; scheduling is broken");
    step_into(state, std::span<const double>(profile.bounds()), combined, scratch);
    std::swap(state, scratch);
    schedule.push_back(std::move(combined));
    task_edges.push_back(std::move(current_edges));

    // Retire finished merges; their unions become ordinary clusters again.
    for (auto& p : parts) {
      if (p.task < 0) continue;
      auto& task = *tasks[static_cast<std::size_t>(p.task)];
      task.on_step_applied(state, profile);
      if (task.finished()) {
        merges.push_back({p.agents, t + 1});
        p.task = -1;
      }
    }

    ++t;
    snapshot();
    if (t > cap)
      throw std::logic_error("control run exceeded its safety cap; scheduling is broken");
  }

  return {std::move(schedule), std::move(task_edges), t,
          std::move(state),    std::move(merges),     std::move(history)};
}

// Restrict the system to `agents` (keeping their relative order) and run the
// scheduler on that subsystem alone.
inline ControlRun run_subsystem(const SystemState& initial, const ConfidenceProfile& profile,
                                std::vector<int> agents, double eps_eq = 0.0) {
  std::sort(agents.begin(), agents.end());
  if (agents.empty()) throw std::invalid_argument("subsystem must be nonempty");
  for (std::size_t k = 0; k + 1 < agents.size(); ++k)
    if (agents[k] == agents[k + 1]) throw std::invalid_argument("subsystem agents must be distinct");
  if (agents.front() < 0 || agents.back() >= initial.agent_count())
    throw std::out_of_range("subsystem agent out of range");

  SystemState sub(static_cast<int>(agents.size()), initial.dimension());
  std::vector<double> sub_bounds;
  sub_bounds.reserve(agents.size());
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const auto src = initial.opinion(agents[k]);
    std::copy(src.begin(), src.end(), sub.opinion(static_cast<int>(k)).begin());
    sub_bounds.push_back(profile.bound(agents[k]));
  }
  return algorithm1_run(sub, ConfidenceProfile(std::move(sub_bounds)), eps_eq);
}

}  // namespace ribc
