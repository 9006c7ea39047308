// Command-line front end: simulate and summarize the random dynamics, run the
// cluster-merging controller, tabulate the closed-form bounds, and run the
// verification battery. Every mode echoes its effective config next to its
// outputs so runs can be replayed exactly.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ribc/bounds.hpp"
#include "ribc/control.hpp"
#include "ribc/experiments.hpp"
#include "ribc/io.hpp"
#include "ribc/verify.hpp"

namespace {

using ribc::json;

struct Artifacts {
  std::vector<std::string> paths;

  void save(const std::string& path, const std::string& payload) {
    ribc::write_text_file(path, payload);
    paths.push_back(path);
  }
};

void echo_config(const ribc::RunConfig& cfg, const std::string& prefix, Artifacts& made) {
  made.save(prefix + ".config.json", ribc::config_to_json(cfg).dump(2) + "\n");
}

json summarize_records(const std::vector<ribc::TrialRecord>& records) {
  json s;
  std::int64_t absorbed = 0, capped = 0, consensus = 0;
  bool absorbing_ok = true;
  std::int64_t tau_min = -1, tau_max = -1;
  double tau_total = 0.0;
  for (const auto& r : records) {
    if (r.capped) {
      ++capped;
      continue;
    }
    ++absorbed;
    if (r.consensus) ++consensus;
    absorbing_ok = absorbing_ok && r.absorbing_ok;
    tau_min = tau_min < 0 ? r.tau : std::min(tau_min, r.tau);
    tau_max = std::max(tau_max, r.tau);
    tau_total += static_cast<double>(r.tau);
  }
  s["trials"] = records.size();
  s["absorbed"] = absorbed;
  s["capped"] = capped;
  s["consensus"] = consensus;
  s["absorbing_ok"] = absorbing_ok;
  if (absorbed > 0) {
    s["tau_min"] = tau_min;
    s["tau_max"] = tau_max;
    s["tau_mean"] = tau_total / static_cast<double>(absorbed);
  }
  return s;
}

void write_trajectories(const ribc::RunConfig& cfg, const std::vector<ribc::TrialRecord>& records,
                        const std::string& prefix, Artifacts& made) {
  if (cfg.experiment.decimate <= 0) return;
  const auto rows = ribc::trajectory_rows(records, cfg.experiment.d);
  std::ostringstream out;
  if (cfg.format == "json")
    ribc::write_trajectory_json(out, rows, cfg.experiment.d);
  else
    ribc::write_trajectory_csv(out, rows, cfg.experiment.d);
  made.save(prefix + ".trajectory." + cfg.format, out.str());
}

void write_records(const ribc::RunConfig& cfg, const std::vector<ribc::TrialRecord>& records,
                   const std::string& prefix, Artifacts& made) {
  std::ostringstream out;
  if (cfg.format == "json")
    ribc::write_records_json(out, records);
  else
    ribc::write_records_csv(out, records);
  made.save(prefix + ".records." + cfg.format, out.str());
}

int run_simulate(const ribc::RunConfig& cfg) {
  const auto records = ribc::run_experiment(cfg.experiment);
  const std::string prefix = ribc::resolve_out_prefix(cfg);
  Artifacts made;
  write_trajectories(cfg, records, prefix, made);
  write_records(cfg, records, prefix, made);
  made.save(prefix + ".summary.json", summarize_records(records).dump(2) + "\n");
  echo_config(cfg, prefix, made);

  const json s = summarize_records(records);
  std::cout << "simulate: " << records.size() << " trial(s), " << s.at("absorbed").get<std::int64_t>()
            << " absorbed, " << s.at("capped").get<std::int64_t>() << " capped\n";
  for (const auto& p : made.paths) std::cout << "  wrote " << p << "\n";
  return 0;
}

int run_montecarlo(const ribc::RunConfig& cfg) {
  const ribc::ExperimentConfig& exp = cfg.experiment;
  const auto records = ribc::run_experiment(exp);
  const std::string prefix = ribc::resolve_out_prefix(cfg);
  Artifacts made;
  write_records(cfg, records, prefix, made);

  json summary = summarize_records(records);
  const double delta = ribc::delta_lower_bound(exp.model);
  summary["delta"] = delta;
  const double r_n = exp.bounds.back();
  const bool bounded = r_n <= 2.0;
  std::int64_t horizon = 0;
  if (bounded) {
    horizon = ribc::floor_Tn(exp.n, r_n);
    summary["tail_horizon"] = horizon;
  }

  const bool all_absorbed = std::all_of(records.begin(), records.end(),
                                        [](const ribc::TrialRecord& r) { return !r.capped; });
  if (all_absorbed) {
    const auto curve = ribc::tau_survival_curve(records);
    std::vector<double> tail;
    if (bounded) {
      tail.reserve(curve.size());
      for (const auto& [t, s] : curve) tail.push_back(ribc::tau_tail_bound(t, horizon, delta));
    }
    std::ostringstream out;
    ribc::write_survival_csv(out, curve, bounded ? &tail : nullptr);
    made.save(prefix + ".survival.csv", out.str());

    if (exp.decimate == 1) {
      const auto mse = ribc::mse_curve(records);
      std::vector<double> envelope;
      if (bounded) {
        envelope.reserve(mse.size());
        for (const auto& pt : mse) envelope.push_back(ribc::mse_envelope(pt.t, exp.n, r_n, delta));
      }
      std::ostringstream out2;
      ribc::write_mse_csv(out2, mse, bounded ? &envelope : nullptr);
      made.save(prefix + ".mse.csv", out2.str());
    }
  }

  made.save(prefix + ".summary.json", summary.dump(2) + "\n");
  echo_config(cfg, prefix, made);

  std::cout << "montecarlo: " << records.size() << " trial(s), delta " << ribc::format_double(delta)
            << (all_absorbed ? "" : ", capped trials present; curves skipped") << "\n";
  for (const auto& p : made.paths) std::cout << "  wrote " << p << "\n";
  return 0;
}

int run_cibc(const ribc::RunConfig& cfg) {
  const ribc::ExperimentConfig& exp = cfg.experiment;
  ribc::SeededStream init_rng(exp.master_seed, 0);
  const ribc::SystemState initial = ribc::initial_state(exp, init_rng);
  const ribc::ConfidenceProfile profile(exp.bounds);

  const ribc::ControlRun run = ribc::algorithm1_run(initial, profile, exp.eps_eq);

  const std::string prefix = ribc::resolve_out_prefix(cfg);
  Artifacts made;

  std::ostringstream sched;
  if (cfg.format == "json")
    ribc::write_schedule_json(sched, run.schedule, exp.n);
  else
    ribc::write_schedule_csv(sched, run.schedule);
  made.save(prefix + ".schedule." + cfg.format, sched.str());

  if (exp.decimate > 0) {
    ribc::TrialRecord rec;
    ribc::SystemState state = initial;
    rec.trajectory.emplace_back(0, state.flat());
    for (std::size_t t = 0; t < run.schedule.size(); ++t) {
      state = ribc::step(state, profile, run.schedule[t]);
      const auto now = static_cast<std::int64_t>(t) + 1;
      if (now % exp.decimate == 0) rec.trajectory.emplace_back(now, state.flat());
    }
    write_trajectories(cfg, {rec}, prefix, made);
  }

  json summary;
  summary["n"] = exp.n;
  summary["d"] = exp.d;
  summary["terminal_time"] = run.terminal_time;
  json merges = json::array();
  for (const auto& m : run.merges)
    merges.push_back({{"agents", m.agents}, {"t", m.generation_time}});
  summary["merges"] = std::move(merges);
  const double r_n = exp.bounds.back();
  if (r_n <= 2.0) {
    const double limit = ribc::compute_Tn_star(exp.n, r_n);
    summary["terminal_bound"] = limit;
    summary["within_bound"] = static_cast<double>(run.terminal_time) <= limit;
  }
  made.save(prefix + ".summary.json", summary.dump(2) + "\n");
  echo_config(cfg, prefix, made);

  std::cout << "cibc: absorbed at t = " << run.terminal_time << " after " << run.merges.size()
            << " merge(s)\n";
  for (const auto& p : made.paths) std::cout << "  wrote " << p << "\n";
  return 0;
}

int run_bounds(const ribc::RunConfig& cfg) {
  const ribc::ExperimentConfig& exp = cfg.experiment;
  if (exp.model.agents() != exp.n)
    throw std::invalid_argument("interaction model must cover all agents");
  const double r_n = exp.bounds.back();
  ribc::BoundsTableRow row;
  row.n = exp.n;
  row.r_n = r_n;
  row.delta = ribc::delta_lower_bound(exp.model);
  row.T_n_star = ribc::compute_Tn_star(exp.n, r_n);
  row.T_n = ribc::compute_Tn(exp.n, r_n);
  row.floor_T_n = ribc::floor_Tn(exp.n, r_n);

  const std::string prefix = ribc::resolve_out_prefix(cfg);
  Artifacts made;
  std::ostringstream out;
  if (cfg.format == "json")
    ribc::write_bounds_json(out, {row});
  else
    ribc::write_bounds_csv(out, {row});
  made.save(prefix + ".bounds." + cfg.format, out.str());
  echo_config(cfg, prefix, made);

  std::cout << "bounds: n = " << row.n << ", r_n = " << ribc::format_double(row.r_n)
            << ", T*_n = " << ribc::format_double(row.T_n_star)
            << ", T_n = " << ribc::format_double(row.T_n)
            << ", delta = " << ribc::format_double(row.delta) << "\n";
  for (const auto& p : made.paths) std::cout << "  wrote " << p << "\n";
  return 0;
}

int run_verify(const ribc::RunConfig& cfg) {
  const auto results = ribc::verify::run_battery(cfg.experiment.master_seed);
  bool ok = true;
  json checks = json::array();
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "[%s] %-26s (%.2fs): ", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.seconds);
    std::cout << line << r.detail << "\n";
    checks.push_back(
        {{"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"detail", r.detail}});
    ok = ok && r.passed;
  }

  json report;
  report["seed"] = cfg.experiment.master_seed;
  report["all_passed"] = ok;
  report["checks"] = std::move(checks);

  const std::string prefix = ribc::resolve_out_prefix(cfg);
  Artifacts made;
  made.save(prefix + ".report.json", report.dump(2) + "\n");
  echo_config(cfg, prefix, made);
  for (const auto& p : made.paths) std::cout << "  wrote " << p << "\n";
  std::cout << (ok ? "verify: all checks passed" : "verify: FAILURES above") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opinion-dynamics toolkit: random pairwise interactions and cluster control"};
  app.require_subcommand(1);

  std::string config_path, out, format;
  std::uint64_t seed = 0;
  int trials = 0;
  std::int64_t max_steps = 0, decimate = 0;

  const auto add_common = [&](CLI::App* sub, bool stochastic) {
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output path prefix");
    sub->add_option("--format", format, "table format: csv or json");
    if (stochastic) sub->add_option("--seed", seed, "master seed");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run trials and record trajectories");
  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "run trials and compare curves against the bounds");
  CLI::App* cibc = app.add_subcommand("cibc", "run the cluster-merging controller");
  CLI::App* bounds = app.add_subcommand("bounds", "tabulate the closed-form bounds");
  CLI::App* verify = app.add_subcommand("verify", "run the verification battery");

  for (CLI::App* sub : {simulate, montecarlo}) {
    add_common(sub, true);
    sub->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
    sub->add_option("--max-steps", max_steps, "step cap per trial")->check(CLI::PositiveNumber);
    sub->add_option("--decimate", decimate, "trajectory decimation; 0 disables")
        ->check(CLI::NonNegativeNumber);
  }
  add_common(cibc, true);
  cibc->add_option("--decimate", decimate, "trajectory decimation; 0 disables")
      ->check(CLI::NonNegativeNumber);
  add_common(bounds, false);
  add_common(verify, true);

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  const std::string mode = active->get_name();

  try {
    ribc::RunConfig cfg = config_path.empty()
                              ? ribc::parse_config_json(json{{"mode", mode}})
                              : ribc::parse_config_file(config_path, mode);
    const auto given = [&](const char* name) {
      const CLI::Option* opt = active->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--seed")) cfg.experiment.master_seed = seed;
    if (given("--trials")) cfg.experiment.trials = trials;
    if (given("--max-steps")) cfg.experiment.max_steps = max_steps;
    if (given("--decimate")) cfg.experiment.decimate = decimate;
    if (given("--out")) cfg.out = out;
    if (given("--format")) {
      if (format != "csv" && format != "json")
        throw std::invalid_argument("format must be csv or json");
      cfg.format = format;
    }
    if (mode == "simulate" || mode == "montecarlo" || mode == "cibc")
      ribc::validate_config(cfg.experiment);

    if (mode == "simulate") return run_simulate(cfg);
    if (mode == "montecarlo") return run_montecarlo(cfg);
    if (mode == "cibc") return run_cibc(cfg);
    if (mode == "bounds") return run_bounds(cfg);
    return run_verify(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
