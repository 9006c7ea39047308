#pragma once

// Config files, CSV/JSON emitters, and the matching readers. One JSON config
// schema covers every CLI mode; unknown keys are hard errors and the parsed
// config echoes back losslessly with all defaults materialized.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ribc/bounds.hpp"
#include "ribc/control.hpp"
#include "ribc/experiments.hpp"
#include "ribc/opinion.hpp"
#include "ribc/random_interaction.hpp"

namespace ribc {

using nlohmann::json;

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: \"" + std::string(s) + "\"");
  return v;
}

inline std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not an integer: \"" + std::string(s) + "\"");
  return v;
}

struct RunConfig {
  std::string mode = "simulate";  // simulate | cibc | bounds | montecarlo | verify
  ExperimentConfig experiment;
  std::string out;                // output prefix; empty falls back to RIBC_OUT_DIR
  std::string format = "csv";     // csv | json

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const char* where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("unknown key \"" + item.key() + "\" in " + where);
  }
}

template <typename T>
T get_as(const json& j, const char* key, const char* expected) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key \"" + std::string(key) + "\": expected " + expected);
  }
}

inline InteractionModel parse_model(const json& j, int n) {
  if (!j.is_object()) throw std::invalid_argument("config key \"model\": expected an object");
  reject_unknown_keys(j, {"kind", "p", "probs"}, "model");
  const auto kind = get_as<std::string>(j, "kind", "a string");
  if (kind == "erdos_renyi") {
    double p = 0.5;
    if (j.contains("p")) p = get_as<double>(j, "p", "a number");
    return InteractionModel::erdos_renyi(n, p);
  }
  if (kind == "pair_matrix") {
    const auto rows = get_as<std::vector<std::vector<double>>>(j, "probs", "an n x n matrix");
    if (static_cast<int>(rows.size()) != n)
      throw std::invalid_argument("model.probs must have one row per agent");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n)
        throw std::invalid_argument("model.probs must have one column per agent");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return InteractionModel::pair_matrix(n, std::move(flat));
  }
  if (kind == "uniform_subset") {
    if (j.contains("p") || j.contains("probs"))
      throw std::invalid_argument("uniform_subset model takes no parameters");
    return InteractionModel::uniform_subset(n);
  }
  throw std::invalid_argument("model.kind must be erdos_renyi, pair_matrix, or uniform_subset");
}

inline InitialCondition parse_init(const json& j, int n, int d) {
  if (!j.is_object()) throw std::invalid_argument("config key \"init\": expected an object");
  reject_unknown_keys(j, {"kind", "opinions"}, "init");
  const auto kind = get_as<std::string>(j, "kind", "a string");
  if (kind == "uniform_ball") return UniformBallInit{};
  if (kind == "counterexample") return CounterexampleInit{};
  if (kind == "explicit") {
    auto opinions = get_as<std::vector<std::vector<double>>>(j, "opinions", "an n x d matrix");
    if (static_cast<int>(opinions.size()) != n)
      throw std::invalid_argument("init.opinions must list one opinion per agent");
    for (const auto& row : opinions)
      if (static_cast<int>(row.size()) != d)
        throw std::invalid_argument("init.opinions entries must have dimension d");
    return ExplicitInit{std::move(opinions)};
  }
  throw std::invalid_argument("init.kind must be explicit, uniform_ball, or counterexample");
}

}  // namespace detail

// Parse one config object. Key "mode" selects the defaults for eps_eq (0 for
// cibc, 1e-9 otherwise) and decimate (1 for simulate and cibc, 0 otherwise).
inline RunConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config root must be an object");
  detail::reject_unknown_keys(j,
                              {"mode", "n", "d", "r", "init", "model", "eps_eq", "trials",
                               "max_steps", "seed", "decimate", "out", "format"},
                              "config");

  RunConfig cfg;
  if (j.contains("mode")) cfg.mode = detail::get_as<std::string>(j, "mode", "a string");
  if (cfg.mode != "simulate" && cfg.mode != "cibc" && cfg.mode != "bounds" &&
      cfg.mode != "montecarlo" && cfg.mode != "verify")
    throw std::invalid_argument("mode must be simulate, cibc, bounds, montecarlo, or verify");

  ExperimentConfig& exp = cfg.experiment;
  if (j.contains("n")) exp.n = detail::get_as<int>(j, "n", "an integer");
  if (j.contains("d")) exp.d = detail::get_as<int>(j, "d", "an integer");
  if (j.contains("r"))
    exp.bounds = detail::get_as<std::vector<double>>(j, "r", "an array of numbers");
  else
    exp.bounds.assign(static_cast<std::size_t>(std::max(exp.n, 0)), 0.7);

  if (j.contains("model"))
    exp.model = detail::parse_model(j.at("model"), exp.n);
  else
    exp.model = InteractionModel::erdos_renyi(exp.n, 0.5);

  if (j.contains("init"))
    exp.init = detail::parse_init(j.at("init"), exp.n, exp.d);
  else
    exp.init = UniformBallInit{};

  exp.eps_eq = cfg.mode == "cibc" ? 0.0 : 1e-9;
  if (j.contains("eps_eq")) exp.eps_eq = detail::get_as<double>(j, "eps_eq", "a number");

  exp.decimate = (cfg.mode == "simulate" || cfg.mode == "cibc") ? 1 : 0;
  if (j.contains("decimate"))
    exp.decimate = detail::get_as<std::int64_t>(j, "decimate", "an integer");

  if (j.contains("trials")) exp.trials = detail::get_as<int>(j, "trials", "an integer");
  if (j.contains("max_steps"))
    exp.max_steps = detail::get_as<std::int64_t>(j, "max_steps", "an integer");
  if (j.contains("seed"))
    exp.master_seed = detail::get_as<std::uint64_t>(j, "seed", "a nonnegative integer");
  if (j.contains("out")) cfg.out = detail::get_as<std::string>(j, "out", "a string");
  if (j.contains("format")) cfg.format = detail::get_as<std::string>(j, "format", "a string");
  if (cfg.format != "csv" && cfg.format != "json")
    throw std::invalid_argument("format must be csv or json");

  if (cfg.mode != "bounds" && cfg.mode != "verify") validate_config(exp);
  else {
    if (exp.n < 3) throw std::invalid_argument("at least 3 agents required");
    if (static_cast<int>(exp.bounds.size()) != exp.n)
      throw std::invalid_argument("confidence bounds must list one radius per agent");
    (void)ConfidenceProfile(exp.bounds);
  }
  return cfg;
}

inline json config_to_json(const RunConfig& cfg) {
  const ExperimentConfig& exp = cfg.experiment;
  json j;
  j["mode"] = cfg.mode;
  j["n"] = exp.n;
  j["d"] = exp.d;
  j["r"] = exp.bounds;

  json init;
  if (const auto* ex = std::get_if<ExplicitInit>(&exp.init)) {
    init["kind"] = "explicit";
    init["opinions"] = ex->opinions;
  } else if (std::holds_alternative<CounterexampleInit>(exp.init)) {
    init["kind"] = "counterexample";
  } else {
    init["kind"] = "uniform_ball";
  }
  j["init"] = std::move(init);

  json model;
  model["kind"] = exp.model.kind();
  if (const auto* er = std::get_if<ErdosRenyiDirected>(&exp.model.generator())) {
    model["p"] = er->p;
  } else if (const auto* pm = std::get_if<PairMatrix>(&exp.model.generator())) {
    const int n = exp.model.agents();
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      rows[static_cast<std::size_t>(i)] =
          std::vector<double>(pm->probs.begin() + static_cast<std::ptrdiff_t>(i) * n,
                              pm->probs.begin() + static_cast<std::ptrdiff_t>(i + 1) * n);
    model["probs"] = std::move(rows);
  }
  j["model"] = std::move(model);

  j["eps_eq"] = exp.eps_eq;
  j["trials"] = exp.trials;
  j["max_steps"] = exp.max_steps;
  j["seed"] = exp.master_seed;
  j["decimate"] = exp.decimate;
  j["out"] = cfg.out;
  j["format"] = cfg.format;
  return j;
}

inline RunConfig parse_config_file(const std::string& path, const std::string& mode_override = "") {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  if (!mode_override.empty() && j.is_object()) j["mode"] = mode_override;
  return parse_config_json(j);
}

// Output prefix: explicit config value, else $RIBC_OUT_DIR/<mode>, else ./<mode>.
inline std::string resolve_out_prefix(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  const char* dir = std::getenv("RIBC_OUT_DIR");
  return (dir != nullptr && *dir != '\0' ? std::string(dir) : std::string(".")) + "/" + cfg.mode;
}

inline void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// ---------------------------------------------------------------------------
// Trajectories: one row per (trial, time, agent) with columns
// trial_id, t, agent, x_1..x_d. JSON mirrors the same rows.
// ---------------------------------------------------------------------------

struct TrajectoryRow {
  int trial_id = 0;
  std::int64_t t = 0;
  int agent = 0;
  std::vector<double> x;

  bool operator==(const TrajectoryRow&) const = default;
};

inline std::vector<std::string> trajectory_columns(int d) {
  std::vector<std::string> cols{"trial_id", "t", "agent"};
  for (int k = 1; k <= d; ++k) cols.push_back("x_" + std::to_string(k));
  return cols;
}

inline std::vector<TrajectoryRow> trajectory_rows(const std::vector<TrialRecord>& records, int d) {
  std::vector<TrajectoryRow> rows;
  for (const auto& rec : records)
    for (const auto& [t, flat] : rec.trajectory) {
      const int n = static_cast<int>(flat.size()) / d;
      for (int i = 0; i < n; ++i)
        rows.push_back({rec.trial_id, t, i,
                        std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i) * d,
                                            flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * d)});
    }
  return rows;
}

inline void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows, int d) {
  const auto cols = trajectory_columns(d);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  for (const auto& row : rows) {
    out << row.trial_id << "," << row.t << "," << row.agent;
    for (double v : row.x) out << "," << format_double(v);
    out << "\n";
  }
}

inline void write_trajectory_json(std::ostream& out, const std::vector<TrajectoryRow>& rows, int d) {
  json j;
  j["columns"] = trajectory_columns(d);
  json jrows = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    r.push_back(row.trial_id);
    r.push_back(row.t);
    r.push_back(row.agent);
    for (double v : row.x) r.push_back(v);
    jrows.push_back(std::move(r));
  }
  j["rows"] = std::move(jrows);
  out << j.dump(2) << "\n";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trajectory file is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "trial_id" || header[1] != "t" || header[2] != "agent")
    throw std::invalid_argument("trajectory header must start with trial_id,t,agent,x_1");
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::invalid_argument("trajectory row has the wrong number of fields");
    TrajectoryRow row;
    row.trial_id = static_cast<int>(parse_int(fields[0]));
    row.t = parse_int(fields[1]);
    row.agent = static_cast<int>(parse_int(fields[2]));
    for (std::size_t k = 3; k < fields.size(); ++k) row.x.push_back(parse_double(fields[k]));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Control schedules: one row per (t, edge) with the canonical edge index and
// its endpoints. JSON lists the edge indices per step.
// ---------------------------------------------------------------------------

inline void write_schedule_csv(std::ostream& out, const std::vector<EdgeSet>& schedule) {
  out << "t,edge_index,i,j\n";
  for (std::size_t t = 0; t < schedule.size(); ++t)
    for (const std::int64_t k : schedule[t].edge_indices()) {
      const auto [i, j] = EdgeSet::edge_at(schedule[t].agents(), k);
      out << t << "," << k << "," << i << "," << j << "\n";
    }
}

inline void write_schedule_json(std::ostream& out, const std::vector<EdgeSet>& schedule, int n) {
  json j;
  j["n"] = n;
  json steps = json::array();
  for (const auto& e : schedule) steps.push_back(e.edge_indices());
  j["steps"] = std::move(steps);
  out << j.dump(2) << "\n";
}

inline std::vector<EdgeSet> read_schedule_csv(std::istream& in, int n) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("schedule file is empty");
  if (split_csv_line(line) != std::vector<std::string>{"t", "edge_index", "i", "j"})
    throw std::invalid_argument("schedule header must be t,edge_index,i,j");
  std::vector<EdgeSet> schedule;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw std::invalid_argument("schedule row must have 4 fields");
    const auto t = static_cast<std::size_t>(parse_int(fields[0]));
    const std::int64_t k = parse_int(fields[1]);
    while (schedule.size() <= t) schedule.emplace_back(n);
    const auto [i, j] = EdgeSet::edge_at(n, k);
    if (i != parse_int(fields[2]) || j != parse_int(fields[3]))
      throw std::invalid_argument("schedule row endpoints disagree with the edge index");
    schedule[t].insert(i, j);
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Small result tables.
// ---------------------------------------------------------------------------

inline void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial_id,tau,capped,absorbing_ok,consensus,n_clusters\n";
  for (const auto& r : records)
    out << r.trial_id << "," << r.tau << "," << (r.capped ? 1 : 0) << ","
        << (r.absorbing_ok ? 1 : 0) << "," << (r.consensus ? 1 : 0) << ","
        << r.final_clusters.size() << "\n";
}

inline void write_records_json(std::ostream& out, const std::vector<TrialRecord>& records) {
  json rows = json::array();
  for (const auto& r : records)
    rows.push_back({{"trial_id", r.trial_id},
                    {"tau", r.tau},
                    {"capped", r.capped},
                    {"absorbing_ok", r.absorbing_ok},
                    {"consensus", r.consensus},
                    {"n_clusters", r.final_clusters.size()}});
  json j;
  j["columns"] = {"trial_id", "tau", "capped", "absorbing_ok", "consensus", "n_clusters"};
  j["rows"] = std::move(rows);
  out << j.dump(2) << "\n";
}

// Survival curve with the theoretical tail where it applies (r_n <= 2).
inline void write_survival_csv(std::ostream& out,
                               const std::vector<std::pair<std::int64_t, double>>& curve,
                               const std::vector<double>* bound) {
  out << "t,survival" << (bound ? ",tail_bound" : "") << "\n";
  for (std::size_t k = 0; k < curve.size(); ++k) {
    out << curve[k].first << "," << format_double(curve[k].second);
    if (bound) out << "," << format_double((*bound)[k]);
    out << "\n";
  }
}

inline void write_mse_csv(std::ostream& out, const std::vector<MseCurvePoint>& curve,
                          const std::vector<double>* envelope) {
  out << "t,mean,std_error" << (envelope ? ",envelope" : "") << "\n";
  for (std::size_t k = 0; k < curve.size(); ++k) {
    out << curve[k].t << "," << format_double(curve[k].mean) << ","
        << format_double(curve[k].std_error);
    if (envelope) out << "," << format_double((*envelope)[k]);
    out << "\n";
  }
}

struct BoundsTableRow {
  int n = 0;
  double r_n = 0.0;
  double delta = 0.0;
  double T_n_star = 0.0;
  double T_n = 0.0;
  std::int64_t floor_T_n = 0;
};

inline void write_bounds_csv(std::ostream& out, const std::vector<BoundsTableRow>& rows) {
  out << "n,r_n,delta,T_n_star,T_n,floor_T_n\n";
  for (const auto& r : rows)
    out << r.n << "," << format_double(r.r_n) << "," << format_double(r.delta) << ","
        << format_double(r.T_n_star) << "," << format_double(r.T_n) << "," << r.floor_T_n << "\n";
}

inline void write_bounds_json(std::ostream& out, const std::vector<BoundsTableRow>& rows) {
  json jrows = json::array();
  for (const auto& r : rows)
    jrows.push_back({{"n", r.n},
                     {"r_n", r.r_n},
                     {"delta", r.delta},
                     {"T_n_star", r.T_n_star},
                     {"T_n", r.T_n},
                     {"floor_T_n", r.floor_T_n}});
  json j;
  j["columns"] = {"n", "r_n", "delta", "T_n_star", "T_n", "floor_T_n"};
  j["rows"] = std::move(jrows);
  out << j.dump(2) << "\n";
}

inline void write_text_file(const std::string& path, const std::string& payload) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << payload;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace ribc
