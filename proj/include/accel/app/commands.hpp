#pragma once

// The run / compare / verify verbs behind the accelopt executable.

#include "accel/app/config.hpp"
#include "accel/app/runner.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace accel::app {

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<int> stride;
  std::optional<std::uint64_t> seed;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, 0, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::filesystem::path& path, const Overrides& ov) {
  RunConfig cfg = parse_config(read_file(path));
  if (ov.out_dir) cfg.output.dir = *ov.out_dir;
  if (ov.stride) {
    if (*ov.stride < 1) throw ConfigError("--stride", 0, 0, "must be >= 1");
    cfg.output.stride = *ov.stride;
  }
  if (ov.seed) cfg.seed = *ov.seed;
  return cfg;
}

inline int cmd_run(const std::string& config_path, const Overrides& ov, std::ostream& out,
                   std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, ov);
  } catch (const ConfigError& e) {
    err << e.located(config_path) << "\n";
    return kConfigError;
  }
  try {
    const RunResult r = execute(cfg);
    const auto paths = write_artifacts(r);
    out << cfg.name << ": " << r.status << " (exit " << r.exit_code << ")\n"
        << "  trajectory " << paths.trajectory.string() << "\n"
        << "  summary    " << paths.summary.string() << "\n"
        << "  config     " << paths.resolved_config.string() << "\n";
    if (!r.message.empty()) err << cfg.name << ": " << r.message << "\n";
    for (const auto& c : r.report.checks)
      if (c.applicable && !c.pass)
        err << cfg.name << ": check " << c.name << " failed (worst " << c.worst_value
            << ", tolerance " << c.tolerance << ")\n";
    return r.exit_code;
  } catch (const ConfigError& e) {
    err << e.located(config_path) << "\n";
    return kConfigError;
  }
}

inline int cmd_compare(const std::vector<std::string>& config_paths, const Overrides& ov,
                       std::ostream& out, std::ostream& err, int decades = 6) {
  std::vector<RunConfig> cfgs;
  for (const auto& path : config_paths) {
    try {
      cfgs.push_back(load_config(path, ov));
    } catch (const ConfigError& e) {
      err << e.located(path) << "\n";
      return kConfigError;
    }
  }
  if (cfgs.empty()) {
    err << "compare: no configurations given\n";
    return kConfigError;
  }
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (!(cfgs[i].problem == cfgs[0].problem) || cfgs[i].seed != cfgs[0].seed) {
      err << "compare: " << config_paths[i] << " uses a different problem than "
          << config_paths[0] << " (problem block and seed must match)\n";
      return kConfigError;
    }
  }
  std::vector<std::future<RunResult>> jobs;
  for (const auto& c : cfgs) jobs.push_back(std::async(std::launch::async, [c] { return execute(c); }));
  std::vector<CompareRow> rows;
  try {
    for (auto& j : jobs) rows.push_back(compare_row(j.get(), decades));
  } catch (const ConfigError& e) {
    err << "compare: " << e.what() << "\n";
    return kConfigError;
  }
  std::ostringstream table;
  write_compare_csv(table, rows, decades);
  const auto path = std::filesystem::path(cfgs[0].output.dir) / "compare.csv";
  write_atomic(path, table.str());
  out << table.str();
  return kOk;
}

inline int cmd_verify(const std::string& csv_path, const std::string& config_path,
                      const Overrides& ov, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, ov);
  } catch (const ConfigError& e) {
    err << e.located(config_path) << "\n";
    return kConfigError;
  }
  std::ifstream in(csv_path);
  if (!in) {
    err << "verify: cannot read " << csv_path << "\n";
    return kConfigError;
  }
  try {
    const ProblemInstance p = build_problem(cfg);
    const CsvTable table = read_csv(in);
    VerificationReport rep;
    if (cfg.is_flow())
      rep = verify_trajectory(cfg, trajectory_from_csv(table, cfg, p.oracle), p.oracle);
    else
      rep = verify_sequence(cfg, sequence_from_csv(table, p.oracle), p.oracle);
    out << to_json(rep).dump(2) << "\n";
    return rep.all_passed() ? kOk : kChecksFailed;
  } catch (const ConfigError& e) {
    err << e.located(config_path) << "\n";
    return kConfigError;
  } catch (const std::runtime_error& e) {
    err << "verify: " << csv_path << ": " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace accel::app
