#pragma once

// Core state types and the synchronous averaging update for heterogeneous
// bounded-confidence opinion dynamics in R^d.
//
// Conventions used throughout the library:
//   - agents are indexed 0..n-1,
//   - confidence bounds are per observer: j influences i when the edge (i,j)
//     is present and ||x_i - x_j|| <= r_i (non-strict),
//   - the update averages x_i with all admitted neighbors simultaneously.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ribc {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

// Per-agent confidence radii. The theory sorts agents so that the radii are
// nonincreasing; this wrapper enforces that labeling. The update law itself
// does not need it, which is why the dynamics functions below accept a plain
// span of bounds.
class ConfidenceProfile {
 public:
  explicit ConfidenceProfile(std::vector<double> bounds) : bounds_(std::move(bounds)) {
    if (bounds_.empty())
      throw std::invalid_argument("confidence bounds must be nonempty");
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      if (!(bounds_[i] > 0.0))
        throw std::invalid_argument("confidence bounds must be positive");
      if (i > 0 && bounds_[i] > bounds_[i - 1])
        throw std::invalid_argument("confidence bounds must be nonincreasing");
    }
  }

  int size() const { return static_cast<int>(bounds_.size()); }
  double bound(int i) const { return bounds_[static_cast<std::size_t>(i)]; }
  double largest() const { return bounds_.front(); }
  double smallest() const { return bounds_.back(); }
  const std::vector<double>& bounds() const { return bounds_; }

  bool operator==(const ConfidenceProfile&) const = default;

 private:
  std::vector<double> bounds_;
};

// Opinions of n agents in R^d at one instant, stored row-major.
class SystemState {
 public:
  SystemState(int n, int d) : n_(n), d_(d), x_(check_extent(n, d), 0.0) {}

  static SystemState from_opinions(const std::vector<std::vector<double>>& opinions) {
    if (opinions.empty())
      throw std::invalid_argument("opinion list must be nonempty");
    const int d = static_cast<int>(opinions.front().size());
    SystemState s(static_cast<int>(opinions.size()), d);
    for (std::size_t i = 0; i < opinions.size(); ++i) {
      if (static_cast<int>(opinions[i].size()) != d)
        throw std::invalid_argument("all opinions must share one dimension");
      std::copy(opinions[i].begin(), opinions[i].end(), s.opinion(static_cast<int>(i)).begin());
    }
    return s;
  }

  int agent_count() const { return n_; }
  int dimension() const { return d_; }
  std::int64_t time() const { return time_; }
  void set_time(std::int64_t t) { time_ = t; }

  std::span<const double> opinion(int i) const {
    check_agent(i);
    return {x_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
  }
  std::span<double> opinion(int i) {
    check_agent(i);
    return {x_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
  }

  const std::vector<double>& flat() const { return x_; }

  bool same_opinions(const SystemState& other) const {
    return n_ == other.n_ && d_ == other.d_ && x_ == other.x_;
  }

 private:
  static std::size_t check_extent(int n, int d) {
    if (n < 1) throw std::invalid_argument("agent count must be positive");
    if (d < 1) throw std::invalid_argument("opinion dimension must be positive");
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
  }
  void check_agent(int i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("agent index out of range");
  }

  int n_;
  int d_;
  std::vector<double> x_;
  std::int64_t time_ = 0;
};

// Directed edge set over n agents, stored as a bitmap in the canonical
// lexicographic order of ordered pairs (i,j), i != j. That order also defines
// the edge indices used in schedule files and in the subset enumeration of
// the sampling module.
class EdgeSet {
 public:
  explicit EdgeSet(int n) : n_(check_n(n)), bits_(pair_count(n), false) {}

  static std::int64_t pair_count(int n) {
    return static_cast<std::int64_t>(n) * (n - 1);
  }

  static std::int64_t edge_index(int n, int i, int j) {
    check_pair(n, i, j);
    return static_cast<std::int64_t>(i) * (n - 1) + (j < i ? j : j - 1);
  }

  static std::pair<int, int> edge_at(int n, std::int64_t index) {
    if (index < 0 || index >= pair_count(n))
      throw std::out_of_range("edge index out of range");
    const int i = static_cast<int>(index / (n - 1));
    const int o = static_cast<int>(index % (n - 1));
    return {i, o < i ? o : o + 1};
  }

  int agents() const { return n_; }

  void insert(int i, int j) { bits_[static_cast<std::size_t>(edge_index(n_, i, j))] = true; }
  void erase(int i, int j) { bits_[static_cast<std::size_t>(edge_index(n_, i, j))] = false; }
  bool contains(int i, int j) const {
    return bits_[static_cast<std::size_t>(edge_index(n_, i, j))];
  }

  std::size_t size() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
  }
  bool empty() const { return std::find(bits_.begin(), bits_.end(), true) == bits_.end(); }

  // Ordered pairs in canonical order.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (std::int64_t k = 0; k < pair_count(n_); ++k)
      if (bits_[static_cast<std::size_t>(k)]) out.push_back(edge_at(n_, k));
    return out;
  }

  std::vector<std::int64_t> edge_indices() const {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 0; k < pair_count(n_); ++k)
      if (bits_[static_cast<std::size_t>(k)]) out.push_back(k);
    return out;
  }

  EdgeSet& merge(const EdgeSet& other) {
    if (other.n_ != n_) throw std::invalid_argument("edge sets must share one agent count");
    for (std::size_t k = 0; k < bits_.size(); ++k)
      if (other.bits_[k]) bits_[k] = true;
    return *this;
  }

  static EdgeSet mutual_pair(int n, int i, int j) {
    EdgeSet e(n);
    e.insert(i, j);
    e.insert(j, i);
    return e;
  }

  // All ordered pairs among `members`.
  static EdgeSet complete_within(int n, std::span<const int> members) {
    EdgeSet e(n);
    for (int i : members)
      for (int j : members)
        if (i != j) e.insert(i, j);
    return e;
  }

  static EdgeSet complete(int n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return complete_within(n, all);
  }

  bool operator==(const EdgeSet&) const = default;

 private:
  static int check_n(int n) {
    if (n < 2) throw std::invalid_argument("edge sets need at least two agents");
    return n;
  }
  static void check_pair(int n, int i, int j) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::out_of_range("agent index out of range");
    if (i == j) throw std::invalid_argument("self loops are not representable");
  }

  int n_;
  std::vector<bool> bits_;
};

namespace detail {

inline void check_dynamics_args(const SystemState& state, std::span<const double> bounds,
                                const EdgeSet& edges) {
  if (static_cast<int>(bounds.size()) != state.agent_count())
    throw std::invalid_argument("bounds length must match the agent count");
  if (edges.agents() != state.agent_count())
    throw std::invalid_argument("edge set must match the agent count");
  for (double r : bounds)
    if (!(r > 0.0)) throw std::invalid_argument("confidence bounds must be positive");
}

}  // namespace detail

// Agents j with (i,j) present and ||x_i - x_j|| <= r_i, ascending.
inline std::vector<int> neighbor_set(const SystemState& state, std::span<const double> bounds,
                                     const EdgeSet& edges, int i) {
  detail::check_dynamics_args(state, bounds, edges);
  const auto xi = state.opinion(i);
  const double ri = bounds[static_cast<std::size_t>(i)];
  std::vector<int> out;
  for (int j = 0; j < state.agent_count(); ++j) {
    if (j == i || !edges.contains(i, j)) continue;
    if (distance(xi, state.opinion(j)) <= ri) out.push_back(j);
  }
  return out;
}

inline std::vector<int> neighbor_set(const SystemState& state, const ConfidenceProfile& profile,
                                     const EdgeSet& edges, int i) {
  return neighbor_set(state, std::span<const double>(profile.bounds()), edges, i);
}

// One synchronous step of the averaging update, written into `out`.
//
// Two determinism rules make absorbing states exact in floating point:
//   - an agent whose admitted neighbors all carry its own bit pattern keeps
//     that pattern,
//   - otherwise the sum runs over {i} union N_i in ascending agent index, so
//     agents averaging the same closed neighborhood compute one shared
//     expression and land on bitwise-equal results.
inline void step_into(const SystemState& state, std::span<const double> bounds,
                      const EdgeSet& edges, SystemState& out) {
  detail::check_dynamics_args(state, bounds, edges);
  const int n = state.agent_count();
  const int d = state.dimension();
  if (&out == &state) throw std::invalid_argument("step_into cannot write in place");
  if (out.agent_count() != n || out.dimension() != d)
    throw std::invalid_argument("output state must match the input shape");

  for (int i = 0; i < n; ++i) {
    const auto xi = state.opinion(i);
    const double ri = bounds[static_cast<std::size_t>(i)];
    int degree = 0;
    bool all_self = true;
    for (int j = 0; j < n; ++j) {
      if (j == i || !edges.contains(i, j)) continue;
      const auto xj = state.opinion(j);
      if (distance(xi, xj) > ri) continue;
      ++degree;
      if (!bitwise_equal(xi, xj)) all_self = false;
    }
    auto yi = out.opinion(i);
    if (degree == 0 || all_self) {
      std::copy(xi.begin(), xi.end(), yi.begin());
      continue;
    }
    for (int k = 0; k < d; ++k) yi[static_cast<std::size_t>(k)] = 0.0;
    for (int j = 0; j < n; ++j) {
      const bool member =
          (j == i) || (edges.contains(i, j) && distance(xi, state.opinion(j)) <= ri);
      if (!member) continue;
      const auto xj = state.opinion(j);
      for (int k = 0; k < d; ++k) yi[static_cast<std::size_t>(k)] += xj[static_cast<std::size_t>(k)];
    }
    const double weight = 1.0 / (1.0 + degree);
    for (int k = 0; k < d; ++k) yi[static_cast<std::size_t>(k)] *= weight;
  }
  out.set_time(state.time() + 1);
}

inline SystemState step(const SystemState& state, std::span<const double> bounds,
                        const EdgeSet& edges) {
  SystemState out(state.agent_count(), state.dimension());
  step_into(state, bounds, edges, out);
  return out;
}

inline SystemState step(const SystemState& state, const ConfidenceProfile& profile,
                        const EdgeSet& edges) {
  return step(state, std::span<const double>(profile.bounds()), edges);
}

// Partition of the agents into groups of epsilon-equal opinions, plus which
// groups could still interact under some edge choice.
struct ClusterPartition {
  std::vector<std::vector<int>> clusters;          // ascending members, ordered by first member
  std::vector<std::vector<double>> representatives;  // opinion of each cluster's first member
  std::vector<std::pair<int, int>> connections;      // cluster index pairs a < b within reach

  bool single_cluster() const { return clusters.size() == 1; }
};

// The pairwise relation ||x_i - x_j|| <= eps_eq failed to be transitive, so
// no cluster partition exists at this tolerance.
class cluster_tolerance_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ClusterPartition detect_clusters(const SystemState& state, std::span<const double> bounds,
                                        double eps_eq) {
  if (static_cast<int>(bounds.size()) != state.agent_count())
    throw std::invalid_argument("bounds length must match the agent count");
  if (!(eps_eq >= 0.0)) throw std::invalid_argument("eps_eq must be nonnegative");

  const int n = state.agent_count();
  std::vector<int> root(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) root[static_cast<std::size_t>(i)] = i;
  auto find = [&root](int a) {
    while (root[static_cast<std::size_t>(a)] != a) a = root[static_cast<std::size_t>(a)];
    return a;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (distance(state.opinion(i), state.opinion(j)) <= eps_eq) {
        const int a = find(i), b = find(j);
        if (a != b) root[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }

  ClusterPartition part;
  std::vector<int> cluster_of(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (cluster_of[static_cast<std::size_t>(r)] < 0) {
      cluster_of[static_cast<std::size_t>(r)] = static_cast<int>(part.clusters.size());
      part.clusters.emplace_back();
    }
    part.clusters[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(r)])].push_back(i);
  }

  for (const auto& members : part.clusters) {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (distance(state.opinion(members[a]), state.opinion(members[b])) > eps_eq)
          throw cluster_tolerance_error(
              "eps_eq relation is not transitive: agents " + std::to_string(members[a]) + " and " +
              std::to_string(members[b]) + " join one chain but sit farther apart than eps_eq");
    const auto rep = state.opinion(members.front());
    part.representatives.emplace_back(rep.begin(), rep.end());
  }

  for (std::size_t a = 0; a < part.clusters.size(); ++a)
    for (std::size_t b = a + 1; b < part.clusters.size(); ++b) {
      double reach = 0.0;
      for (int i : part.clusters[a]) reach = std::max(reach, bounds[static_cast<std::size_t>(i)]);
      for (int i : part.clusters[b]) reach = std::max(reach, bounds[static_cast<std::size_t>(i)]);
      const double gap = distance(std::span<const double>(part.representatives[a]),
                                  std::span<const double>(part.representatives[b]));
      if (gap <= reach) part.connections.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  return part;
}

inline ClusterPartition detect_clusters(const SystemState& state, const ConfidenceProfile& profile,
                                        double eps_eq) {
  return detect_clusters(state, std::span<const double>(profile.bounds()), eps_eq);
}

// The absorbing configuration: every pair is either eps-equal or out of both
// agents' reach. Such a state cannot move under any edge choice.
inline bool is_E1(const SystemState& state, std::span<const double> bounds, double eps_eq) {
  if (static_cast<int>(bounds.size()) != state.agent_count())
    throw std::invalid_argument("bounds length must match the agent count");
  if (!(eps_eq >= 0.0)) throw std::invalid_argument("eps_eq must be nonnegative");
  const int n = state.agent_count();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double gap = distance(state.opinion(i), state.opinion(j));
      if (gap <= eps_eq) continue;
      if (gap > std::max(bounds[static_cast<std::size_t>(i)], bounds[static_cast<std::size_t>(j)]))
        continue;
      return false;
    }
  return true;
}

inline bool is_E1(const SystemState& state, const ConfidenceProfile& profile, double eps_eq) {
  return is_E1(state, std::span<const double>(profile.bounds()), eps_eq);
}

inline double subset_diameter(const SystemState& state, std::span<const int> members) {
  if (members.empty()) throw std::invalid_argument("subset must be nonempty");
  double diam = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      diam = std::max(diam, distance(state.opinion(members[a]), state.opinion(members[b])));
  return diam;
}

}  // namespace ribc
