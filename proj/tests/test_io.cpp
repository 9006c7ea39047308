#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ribc/io.hpp"

using namespace ribc;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("doubles round-trip through shortest decimal form") {
  for (const double v : {1.0 / 3.0, 0.1, 1e-300, 12345.678901234567, -2.5e-17, 0.0, -7.25}) {
    REQUIRE(parse_double(format_double(v)) == v);
  }
  REQUIRE(format_double(1.0) == "1");
  REQUIRE(format_double(0.5) == "0.5");
  REQUIRE(parse_int("-42") == -42);
  REQUIRE_THROWS_AS(parse_int("12x"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_double("abc"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("a minimal config fills documented defaults") {
  const RunConfig cfg = parse_config_json(json{{"mode", "simulate"}, {"n", 3}});
  REQUIRE(cfg.mode == "simulate");
  REQUIRE(cfg.format == "csv");
  REQUIRE(cfg.out.empty());
  const ExperimentConfig& exp = cfg.experiment;
  REQUIRE(exp.n == 3);
  REQUIRE(exp.d == 1);
  REQUIRE(exp.bounds == std::vector<double>{0.7, 0.7, 0.7});
  REQUIRE(exp.model == InteractionModel::erdos_renyi(3, 0.5));
  REQUIRE(std::holds_alternative<UniformBallInit>(exp.init));
  REQUIRE(exp.eps_eq == 1e-9);
  REQUIRE(exp.trials == 1);
  REQUIRE(exp.max_steps == 100000);
  REQUIRE(exp.master_seed == 0);
  REQUIRE(exp.decimate == 1);
}

TEST_CASE("mode selects the eps and decimation defaults") {
  REQUIRE(parse_config_json(json{{"mode", "cibc"}, {"n", 3}}).experiment.eps_eq == 0.0);
  REQUIRE(parse_config_json(json{{"mode", "cibc"}, {"n", 3}}).experiment.decimate == 1);
  REQUIRE(parse_config_json(json{{"mode", "montecarlo"}, {"n", 3}}).experiment.decimate == 0);
  REQUIRE(parse_config_json(json{{"mode", "montecarlo"}, {"n", 3}}).experiment.eps_eq == 1e-9);
  REQUIRE_THROWS_WITH(parse_config_json(json{{"mode", "fly"}, {"n", 3}}),
                      ContainsSubstring("mode must be"));
}

TEST_CASE("unknown keys are rejected at every level") {
  REQUIRE_THROWS_WITH(parse_config_json(json{{"mode", "simulate"}, {"n", 3}, {"bogus", 1}}),
                      ContainsSubstring("unknown key \"bogus\" in config"));
  REQUIRE_THROWS_WITH(
      parse_config_json(json{{"mode", "simulate"},
                             {"n", 3},
                             {"init", {{"kind", "uniform_ball"}, {"radius", 2.0}}}}),
      ContainsSubstring("unknown key \"radius\" in init"));
  REQUIRE_THROWS_WITH(
      parse_config_json(
          json{{"mode", "simulate"}, {"n", 3}, {"model", {{"kind", "erdos_renyi"}, {"q", 0.5}}}}),
      ContainsSubstring("unknown key \"q\" in model"));
}

TEST_CASE("config type and domain errors carry the offending key") {
  REQUIRE_THROWS_WITH(parse_config_json(json{{"mode", "simulate"}, {"n", "three"}}),
                      ContainsSubstring("config key \"n\": expected an integer"));
  REQUIRE_THROWS_WITH(
      parse_config_json(json{{"mode", "simulate"}, {"n", 3}, {"r", {0.5, 0.7, 0.7}}}),
      ContainsSubstring("nonincreasing"));
  REQUIRE_THROWS_WITH(
      parse_config_json(
          json{{"mode", "simulate"}, {"n", 3}, {"model", {{"kind", "erdos_renyi"}, {"p", 1.0}}}}),
      ContainsSubstring("strictly in (0,1)"));
  REQUIRE_THROWS_WITH(
      parse_config_json(
          json{{"mode", "simulate"}, {"n", 3}, {"model", {{"kind", "uniform_subset"}, {"p", 0.5}}}}),
      ContainsSubstring("takes no parameters"));
  REQUIRE_THROWS_WITH(
      parse_config_json(json{{"mode", "simulate"}, {"n", 3}, {"model", {{"kind", "smallworld"}}}}),
      ContainsSubstring("model.kind"));
  REQUIRE_THROWS_WITH(
      parse_config_json(json{{"mode", "simulate"},
                             {"n", 3},
                             {"init", {{"kind", "explicit"}, {"opinions", {{0.0}, {1.0}}}}}}),
      ContainsSubstring("one opinion per agent"));
  REQUIRE_THROWS_AS(parse_config_json(json::array()), std::invalid_argument);
}

TEST_CASE("configs echo losslessly through json") {
  json j;
  j["mode"] = "montecarlo";
  j["n"] = 4;
  j["d"] = 2;
  j["r"] = {1.5, 1.0, 1.0, 0.5};
  j["init"] = {{"kind", "explicit"},
               {"opinions", {{0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0}, {0.0, 1.0}}}};
  json probs = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(i == k ? 0.0 : 0.25 + 0.1 * i);
    probs.push_back(std::move(row));
  }
  j["model"] = {{"kind", "pair_matrix"}, {"probs", std::move(probs)}};
  j["eps_eq"] = 1e-7;
  j["trials"] = 17;
  j["max_steps"] = 500;
  j["seed"] = 42;
  j["decimate"] = 2;
  j["out"] = "runs/foo";
  j["format"] = "json";

  const RunConfig cfg = parse_config_json(j);
  const json echoed = config_to_json(cfg);
  REQUIRE(parse_config_json(echoed) == cfg);
  REQUIRE(config_to_json(parse_config_json(echoed)) == echoed);
  REQUIRE(echoed.at("r") == j.at("r"));
  REQUIRE(echoed.at("model").at("probs") == j.at("model").at("probs"));
}

TEST_CASE("config files honor the command-line mode override") {
  const auto path = std::filesystem::temp_directory_path() / "ribc_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"mode": "simulate", "n": 3, "trials": 2})";
  }
  REQUIRE(parse_config_file(path.string()).mode == "simulate");
  const RunConfig cfg = parse_config_file(path.string(), "montecarlo");
  REQUIRE(cfg.mode == "montecarlo");
  REQUIRE(cfg.experiment.trials == 2);
  std::filesystem::remove(path);

  REQUIRE_THROWS_WITH(parse_config_file("/nonexistent/ribc.json"),
                      ContainsSubstring("cannot open"));
  {
    std::ofstream out(path);
    out << "{not json";
  }
  REQUIRE_THROWS_WITH(parse_config_file(path.string()), ContainsSubstring("parse error"));
  std::filesystem::remove(path);
}

TEST_CASE("output prefixes fall back to the environment") {
  RunConfig cfg;
  cfg.mode = "simulate";
  cfg.out = "explicit/prefix";
  REQUIRE(resolve_out_prefix(cfg) == "explicit/prefix");

  cfg.out.clear();
  setenv("RIBC_OUT_DIR", "/tmp/ribc_out", 1);
  REQUIRE(resolve_out_prefix(cfg) == "/tmp/ribc_out/simulate");
  unsetenv("RIBC_OUT_DIR");
  REQUIRE(resolve_out_prefix(cfg) == "./simulate");
}

TEST_CASE("trajectories round-trip through csv bitwise") {
  TrialRecord rec;
  rec.trial_id = 3;
  rec.trajectory = {{0, {0.1, 0.2, 1.0 / 3.0, 0.4}}, {5, {0.5, 0.6, 0.7, 1e-17}}};
  const auto rows = trajectory_rows({rec}, 2);
  REQUIRE(rows.size() == 4);
  REQUIRE(rows[0] == TrajectoryRow{3, 0, 0, {0.1, 0.2}});
  REQUIRE(rows[3] == TrajectoryRow{3, 5, 1, {0.7, 1e-17}});

  std::ostringstream out;
  write_trajectory_csv(out, rows, 2);
  std::istringstream in(out.str());
  REQUIRE(read_trajectory_csv(in) == rows);

  std::istringstream bad("foo,bar\n");
  REQUIRE_THROWS_WITH(read_trajectory_csv(bad), ContainsSubstring("trajectory header"));

  std::ostringstream js;
  write_trajectory_json(js, rows, 2);
  const json parsed = json::parse(js.str());
  REQUIRE(parsed.at("columns") ==
          json(std::vector<std::string>{"trial_id", "t", "agent", "x_1", "x_2"}));
  REQUIRE(parsed.at("rows").size() == 4);
  REQUIRE(parsed.at("rows")[0][3].get<double>() == 0.1);
}

TEST_CASE("schedules round-trip through csv") {
  std::vector<EdgeSet> schedule;
  EdgeSet a(4);
  a.insert(0, 1);
  a.insert(1, 0);
  EdgeSet b(4);
  b.insert(2, 3);
  b.insert(0, 3);
  schedule.push_back(a);
  schedule.push_back(b);

  std::ostringstream out;
  write_schedule_csv(out, schedule);
  std::istringstream in(out.str());
  REQUIRE(read_schedule_csv(in, 4) == schedule);

  std::istringstream bad("t,i,j\n");
  REQUIRE_THROWS_WITH(read_schedule_csv(bad, 4), ContainsSubstring("schedule header"));

  std::ostringstream js;
  write_schedule_json(js, schedule, 4);
  const json parsed = json::parse(js.str());
  REQUIRE(parsed.at("n") == 4);
  REQUIRE(parsed.at("steps").size() == 2);

  // Rows whose endpoints disagree with the canonical edge index are rejected.
  std::istringstream forged("t,edge_index,i,j\n0,0,2,3\n");
  REQUIRE_THROWS_WITH(read_schedule_csv(forged, 4), ContainsSubstring("disagree"));
}

TEST_CASE("record and curve tables print the expected columns") {
  TrialRecord rec;
  rec.trial_id = 0;
  rec.tau = 4;
  rec.absorbing_ok = true;
  rec.consensus = false;
  rec.final_clusters = {{0, 1}, {2}};

  std::ostringstream rc;
  write_records_csv(rc, {rec});
  REQUIRE(rc.str() == "trial_id,tau,capped,absorbing_ok,consensus,n_clusters\n0,4,0,1,0,2\n");

  std::ostringstream rj;
  write_records_json(rj, {rec});
  const json jrec = json::parse(rj.str());
  REQUIRE(jrec.at("rows")[0].at("tau") == 4);

  std::ostringstream sv;
  const std::vector<std::pair<std::int64_t, double>> curve{{0, 1.0}, {1, 0.5}};
  const std::vector<double> tail{1.0, 0.75};
  write_survival_csv(sv, curve, &tail);
  REQUIRE(sv.str() == "t,survival,tail_bound\n0,1,1\n1,0.5,0.75\n");

  std::ostringstream sv2;
  write_survival_csv(sv2, curve, nullptr);
  REQUIRE(sv2.str() == "t,survival\n0,1\n1,0.5\n");

  std::ostringstream ms;
  const std::vector<MseCurvePoint> mse{{0, 12.0, 0.5}};
  const std::vector<double> env{12.0};
  write_mse_csv(ms, mse, &env);
  REQUIRE(ms.str() == "t,mean,std_error,envelope\n0,12,0.5,12\n");

  std::ostringstream bc;
  write_bounds_csv(bc, {{3, 0.7, 0.015625, 102.0, 86.53010609158879, 86}});
  REQUIRE(bc.str() ==
          "n,r_n,delta,T_n_star,T_n,floor_T_n\n3,0.7,0.015625,102,86.53010609158879,86\n");

  std::ostringstream bj;
  write_bounds_json(bj, {{3, 0.7, 0.015625, 102.0, 86.53010609158879, 86}});
  const json jb = json::parse(bj.str());
  REQUIRE(jb.at("rows")[0].at("floor_T_n") == 86);
}

TEST_CASE("text files land under freshly created parents") {
  const auto dir = std::filesystem::temp_directory_path() / "ribc_test_io" / "nested";
  const auto path = dir / "payload.txt";
  std::filesystem::remove_all(dir.parent_path());
  write_text_file(path.string(), "hello\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(content == "hello\n");
  std::filesystem::remove_all(dir.parent_path());
}
