#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include "ribc/control.hpp"
#include "ribc/verify.hpp"

using namespace ribc;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("merge task validates its preconditions") {
  const ConfidenceProfile p({1.0, 0.5});
  const SystemState ok = SystemState::from_opinions({{0.0}, {0.8}});
  REQUIRE_NOTHROW(MergeTask({0}, {1}, ok, p));

  REQUIRE_THROWS_WITH(MergeTask({1}, {0}, ok, p), ContainsSubstring("smallest agent index"));
  REQUIRE_THROWS_WITH(MergeTask({0}, {0, 1}, ok, p), ContainsSubstring("disjoint"));
  REQUIRE_THROWS_AS(MergeTask({0}, {}, ok, p), std::invalid_argument);
  REQUIRE_THROWS_AS(MergeTask({0}, {2}, ok, p), std::out_of_range);

  const SystemState same = SystemState::from_opinions({{0.3}, {0.3}});
  REQUIRE_THROWS_WITH(MergeTask({0}, {1}, same, p), ContainsSubstring("distinct points"));

  const SystemState far = SystemState::from_opinions({{0.0}, {2.0}});
  REQUIRE_THROWS_WITH(MergeTask({0}, {1}, far, p), ContainsSubstring("not connected"));

  const ConfidenceProfile p3({1.0, 0.5, 0.5});
  const SystemState spread = SystemState::from_opinions({{0.0}, {0.1}, {1.0}});
  REQUIRE_THROWS_WITH(MergeTask({0, 1}, {2}, spread, p3), ContainsSubstring("co-located"));

  MergeTask task({0}, {1}, ok, p);
  (void)task.next_edges(ok, p);
  REQUIRE_THROWS_AS(task.next_edges(ok, p), std::logic_error);
}

TEST_CASE("a lone shuttle halves toward its target and closes with a clique") {
  const ConfidenceProfile p({1.0, 0.25});
  const SystemState init = SystemState::from_opinions({{0.0}, {1.0}});

  const MergeScheduleResult r = merge_schedule(init, p, {0}, {1});
  REQUIRE(r.steps_used == 3);
  REQUIRE(r.schedule.size() == 3);
  REQUIRE(r.schedule[0] == EdgeSet::mutual_pair(2, 0, 1));
  REQUIRE(r.schedule[1] == EdgeSet::mutual_pair(2, 0, 1));
  REQUIRE(r.schedule[2] == EdgeSet::complete(2));
  REQUIRE(r.merged.opinion(0)[0] == 0.875);
  REQUIRE(r.merged.opinion(1)[0] == 0.875);

  REQUIRE(r.predicted.phase_limit == 10);
  REQUIRE(r.predicted.halving_limit == 2);
  REQUIRE(r.predicted.step_limit == 31);
  REQUIRE(r.steps_used <= r.predicted.step_limit);

  const auto replay = verify::check_merge_schedule(init, p, {0}, {1}, r.schedule);
  REQUIRE(replay.ok);
  REQUIRE(replay.halvings == 2);
  REQUIRE(replay.phases == 0);

  auto truncated = r.schedule;
  truncated.pop_back();
  REQUIRE_FALSE(verify::check_merge_schedule(init, p, {0}, {1}, truncated).ok);

  auto tampered = r.schedule;
  tampered[0] = EdgeSet(2);
  REQUIRE_FALSE(verify::check_merge_schedule(init, p, {0}, {1}, tampered).ok);
}

TEST_CASE("clusters already in reach close in a single clique step") {
  const ConfidenceProfile p({1.0, 0.5});
  const SystemState init = SystemState::from_opinions({{0.0}, {0.3}});
  const MergeScheduleResult r = merge_schedule(init, p, {0}, {1});
  REQUIRE(r.steps_used == 1);
  REQUIRE(r.schedule[0] == EdgeSet::complete(2));
  REQUIRE(r.merged.opinion(0)[0] == 0.15);
  REQUIRE(r.predicted.step_limit == 2);
  REQUIRE(verify::check_merge_schedule(init, p, {0}, {1}, r.schedule).ok);
}

TEST_CASE("the scheduler reproduces the three-agent worked run") {
  const ConfidenceProfile p({1.5, 0.5, 0.5});
  const SystemState init = SystemState::from_opinions({{0.0}, {0.4}, {1.0}});

  const ControlRun run = algorithm1_run(init, p, 0.0);
  REQUIRE(run.terminal_time == 6);
  REQUIRE(run.schedule.size() == 6);

  REQUIRE(run.merges.size() == 2);
  REQUIRE(run.merges[0].agents == std::vector<int>{0, 1});
  REQUIRE(run.merges[0].generation_time == 1);
  REQUIRE(run.merges[1].agents == std::vector<int>{0, 1, 2});
  REQUIRE(run.merges[1].generation_time == 6);

  REQUIRE(run.schedule[0] == EdgeSet::complete_within(3, std::vector<int>{0, 1}));
  REQUIRE(run.schedule[1] == EdgeSet::mutual_pair(3, 0, 2));
  REQUIRE(run.schedule[2] == EdgeSet::complete_within(3, std::vector<int>{0, 2}));
  REQUIRE(run.schedule[3] == EdgeSet::mutual_pair(3, 0, 1));
  REQUIRE(run.schedule[4] == EdgeSet::complete_within(3, std::vector<int>{0, 1}));
  REQUIRE(run.schedule[5] == EdgeSet::complete(3));

  // Replay the control input and pin every intermediate state.
  const std::vector<std::vector<double>> want = {
      {0.2, 0.2, 1.0},  {0.6, 0.2, 1.0},   {0.8, 0.2, 0.8},
      {0.5, 0.2, 0.8},  {0.35, 0.35, 0.8}, {0.5, 0.5, 0.5},
  };
  SystemState state = init;
  for (std::size_t t = 0; t < run.schedule.size(); ++t) {
    state = step(state, p, run.schedule[t]);
    REQUIRE(state.flat() == want[t]);
  }
  REQUIRE(run.final_state.same_opinions(state));
  REQUIRE(is_E1(run.final_state, p, 0.0));

  REQUIRE(run.partition_history.size() == 7);
  REQUIRE(run.partition_history[0] == std::vector<std::vector<int>>{{0}, {1}, {2}});
  REQUIRE(run.partition_history[1] == std::vector<std::vector<int>>{{0, 1}, {2}});
  REQUIRE(run.partition_history[6] == std::vector<std::vector<int>>{{0, 1, 2}});

  REQUIRE(static_cast<double>(run.terminal_time) <= compute_Tn_star(3, p.smallest()));
}

TEST_CASE("absorbing initial states terminate immediately") {
  const ConfidenceProfile p({0.5, 0.4});
  const SystemState init = SystemState::from_opinions({{0.0}, {1.0}});
  const ControlRun run = algorithm1_run(init, p, 0.0);
  REQUIRE(run.terminal_time == 0);
  REQUIRE(run.schedule.empty());
  REQUIRE(run.merges.empty());
  REQUIRE(run.partition_history == std::vector<std::vector<std::vector<int>>>{{{0}, {1}}});
  REQUIRE(run.final_state.same_opinions(init));
}

TEST_CASE("generated clusters replay as standalone subsystems") {
  const ConfidenceProfile p({1.5, 0.5, 0.5});
  const SystemState init = SystemState::from_opinions({{0.0}, {0.4}, {1.0}});
  const ControlRun run = algorithm1_run(init, p, 0.0);

  for (const auto& event : run.merges) {
    const ControlRun sub = run_subsystem(init, p, event.agents, 0.0);
    REQUIRE(sub.terminal_time == event.generation_time);
  }

  REQUIRE_THROWS_AS(run_subsystem(init, p, {0, 0}, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(run_subsystem(init, p, {0, 5}, 0.0), std::out_of_range);
  REQUIRE_THROWS_AS(run_subsystem(init, p, {}, 0.0), std::invalid_argument);
}
