#pragma once

// Run orchestration: builds the problem from a RunConfig, executes a flow or a
// discrete method, runs the configured checks and writes artifacts.

#include "accel/app/config.hpp"
#include "accel/discrete.hpp"
#include "accel/flow.hpp"
#include "accel/objective.hpp"
#include "accel/verify.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace accel::app {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRunFailure = 3, kChecksFailed = 4 };

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Deterministic in (problem block, seed).
inline ProblemInstance build_problem(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  std::optional<Vector> x0;
  if (!p.x0.empty()) x0 = to_vector(p.x0);
  try {
    if (p.name == "quadratic") {
      Matrix Q(p.dim, p.dim);
      for (int i = 0; i < p.dim; ++i)
        for (int j = 0; j < p.dim; ++j) Q(i, j) = p.Q[i][j];
      const Vector xs = p.x_star.empty() ? Vector(Vector::Zero(p.dim)) : to_vector(p.x_star);
      return make_quadratic(Q, xs, x0 ? *x0 : Vector(Vector::Ones(p.dim)));
    }
    if (p.name == "conditioned_quadratic")
      return make_conditioned_quadratic(p.dim, p.condition, cfg.seed, x0);
    if (p.name == "rosenbrock") {
      Vector start(2);
      start << -1.2, 1;
      return make_rosenbrock(x0 ? *x0 : start);
    }
    if (p.name == "log_sum_exp") return make_log_sum_exp(p.dim, p.rows, cfg.seed, x0);
  } catch (const InvalidArgument& e) {
    throw ConfigError("problem", 0, 0, e.what());
  }
  throw ConfigError("problem.name", 0, 0, "unknown problem '" + p.name + "'");
}

inline ControllerSpec build_controller(const FlowConfig& f) {
  ControllerSpec c;
  c.family = f.controller;
  c.clf = ClfParams{f.a, f.b, f.c, f.pd_hessian_mode};
  c.metric = MetricSpec{f.metric, f.eig_floor, std::nullopt};
  c.delta = f.delta;
  c.delta_taper = f.delta_taper;
  c.rate_eta = f.rate_eta;
  c.gains = Gains{f.gamma_a, f.gamma_b, f.gamma_c};
  return c;
}

inline FlowOptions build_flow_options(const RunConfig& cfg) {
  const auto& f = cfg.flow;
  FlowOptions o;
  o.h = f.h;
  o.t_max = f.t_max;
  o.method = f.integrator;
  o.mode = f.mode;
  o.stop = StoppingRule{f.tol_g, f.tol_v};
  o.record_stride = static_cast<std::size_t>(cfg.output.stride);
  o.divergence_bound = f.divergence_bound;
  return o;
}

struct RunResult {
  RunConfig config;
  ProblemInstance problem;
  std::optional<TrajectoryRecord> trajectory;
  std::optional<IterateSequence> sequence;
  /// converged | max_time | max_iters | diverged | infeasible | numerical_failure
  std::string status;
  std::string message;
  VerificationReport report;
  int exit_code = kOk;
};

/// First iteration index at which |grad E| <= 10^-k, for k = 0, 1, ...
inline std::vector<DecadeHit> sequence_decades(const IterateSequence& seq,
                                               const ObjectiveOracle& oracle) {
  std::vector<DecadeHit> hits;
  int next = 0;
  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    const Scalar g = oracle.gradient(seq.points[k]).norm();
    if (!std::isfinite(g)) break;
    while (next <= 15 && g <= std::pow(10.0, -next)) {
      hits.push_back({next, static_cast<Scalar>(k), k});
      ++next;
    }
  }
  return hits;
}

inline IterateSequence run_discrete(const RunConfig& cfg, const ProblemInstance& p) {
  const auto& d = cfg.discrete;
  const auto iters = static_cast<std::size_t>(d.max_iters);
  const auto& o = p.oracle;
  if (cfg.method == "heavy_ball") {
    if (d.alphas.empty()) return heavy_ball_run(o, p.x0, d.alpha, d.beta, iters, d.tol_g);
    std::vector<Scalar> a(d.alphas.begin(), d.alphas.begin() + std::min(iters, d.alphas.size()));
    std::vector<Scalar> b(d.betas.begin(), d.betas.begin() + std::min(iters, d.betas.size()));
    return heavy_ball_iterate(o, p.x0, p.x0, a, b, d.tol_g);
  }
  if (cfg.method == "nesterov1")
    return nesterov_one_step_run(o, p.x0, d.alpha, d.beta, d.gamma.value_or(d.alpha * d.beta),
                                 iters, d.tol_g);
  if (cfg.method == "nesterov2") return nesterov_two_step_run(o, p.x0, d.alpha, d.beta, iters, d.tol_g);
  if (cfg.method == "cg") {
    StepRule step = d.step_rule == "exact"   ? exact_quadratic_step(o)
                    : d.step_rule == "fixed" ? fixed_step(d.alpha)
                                             : step_schedule(d.alphas);
    BetaRule beta = d.beta_rule == "schedule" ? beta_schedule(d.betas) : fletcher_reeves();
    return cg_iterate(o, p.x0, iters, step, beta, d.tol_g);
  }
  const MetricKind kind = cfg.method == "accel_qn" ? MetricKind::QuasiNewton : d.metric;
  return accelerated_newton_run(o, MetricSpec{kind, d.eig_floor, std::nullopt}, p.x0,
                                Gains{d.gamma_a, d.gamma_b, 0}, d.h, iters, d.tol_g);
}

inline bool wants(const VerifyConfig& v, std::string_view check) {
  for (const auto& c : v.checks)
    if (c == check) return true;
  return false;
}

inline VerificationReport verify_trajectory(const RunConfig& cfg, const TrajectoryRecord& traj,
                                            const ObjectiveOracle& oracle) {
  VerificationReport rep;
  const auto& v = cfg.verify;
  if (wants(v, "dissipation"))
    rep.append(check_dissipation(traj, oracle, build_controller(cfg.flow).clf,
                                 {v.dissipation_mode, v.eta, v.dissipation_tol}));
  if (wants(v, "adjoint_consistency"))
    rep.append(check_adjoint_consistency(traj, oracle, v.adjoint_tol));
  if (wants(v, "singular_arc")) rep.append(check_singular_arc(traj, v.singular_arc_tol));
  if (wants(v, "stationarity"))
    rep.append(check_stationarity(traj, oracle, cfg.flow.tol_g, cfg.flow.tol_v));
  return rep;
}

inline VerificationReport verify_sequence(const RunConfig& cfg, const IterateSequence& seq,
                                          const ObjectiveOracle& oracle) {
  VerificationReport rep;
  if (wants(cfg.verify, "stationarity"))
    rep.append(check_stationarity(seq, oracle, cfg.discrete.tol_g));
  return rep;
}

inline int exit_code_for(const std::string& status, const VerificationReport& rep) {
  if (status == "diverged" || status == "infeasible" || status == "numerical_failure")
    return kRunFailure;
  return rep.all_passed() ? kOk : kChecksFailed;
}

/// Runs the configured method. Throws ConfigError for inputs the problem
/// factories reject.
inline RunResult execute(const RunConfig& cfg) {
  RunResult r{cfg, build_problem(cfg), std::nullopt, std::nullopt, {}, {}, {}, kOk};
  const auto& p = r.problem;
  if (cfg.is_flow()) {
    ControllerSpec c = build_controller(cfg.flow);
    if (c.metric.kind == MetricKind::QuasiNewton && cfg.flow.qn_init == "hessian")
      c.metric.qn_state = floor_spectrum(p.oracle.hessian(p.x0), c.metric.eig_floor);
    std::optional<Vector> v0;
    if (!cfg.flow.v0.empty()) v0 = to_vector(cfg.flow.v0);
    r.trajectory = integrate(c, p.oracle, AugmentedState::consistent(p.oracle, p.x0, v0),
                             build_flow_options(cfg), p.name);
    r.status = std::string(to_string(r.trajectory->status));
    r.message = r.trajectory->message;
    r.report = verify_trajectory(cfg, *r.trajectory, p.oracle);
  } else {
    try {
      r.sequence = run_discrete(cfg, p);
      const auto& last = r.sequence->points.back();
      const Scalar g = p.oracle.gradient(last).norm();
      if (accel::detail::escaped(last) || !std::isfinite(g)) {
        r.status = "diverged";
        r.message = "iterate left the divergence bound at k = " +
                    std::to_string(r.sequence->iterations());
      } else {
        r.status = g <= cfg.discrete.tol_g ? "converged" : "max_iters";
      }
    } catch (const std::exception& e) {
      r.status = "numerical_failure";
      r.message = e.what();
      r.sequence = IterateSequence{{p.x0}, {}};
    }
    r.report = verify_sequence(cfg, *r.sequence, p.oracle);
  }
  r.exit_code = exit_code_for(r.status, r.report);
  return r;
}

// CSV

inline std::string format_csv_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> flow_csv_header(Eigen::Index n) {
  std::vector<std::string> h{"t"};
  for (Eigen::Index i = 0; i < n; ++i) h.push_back("x" + std::to_string(i));
  for (Eigen::Index i = 0; i < n; ++i) h.push_back("v" + std::to_string(i));
  for (const char* c : {"E", "grad_norm", "V", "lieV", "y"}) h.emplace_back(c);
  for (Eigen::Index i = 0; i < n; ++i) h.push_back("u" + std::to_string(i));
  for (Eigen::Index i = 0; i < n; ++i) h.push_back("lambda_x" + std::to_string(i));
  for (Eigen::Index i = 0; i < n; ++i) h.push_back("lambda_v" + std::to_string(i));
  return h;
}

inline std::vector<std::string> discrete_csv_header(Eigen::Index n) {
  std::vector<std::string> h{"k"};
  for (Eigen::Index i = 0; i < n; ++i) h.push_back("x" + std::to_string(i));
  h.emplace_back("E");
  h.emplace_back("grad_norm");
  return h;
}

namespace detail {
inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}
inline void append(std::vector<std::string>& row, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(format_csv_double(v[i]));
}
}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj, Eigen::Index n) {
  detail::write_row(os, flow_csv_header(n));
  for (const auto& s : traj.samples) {
    std::vector<std::string> row{format_csv_double(s.state.t)};
    detail::append(row, s.state.x);
    detail::append(row, s.state.v);
    for (double x : {s.E, s.grad_norm, s.V, s.lieV, s.state.y}) row.push_back(format_csv_double(x));
    detail::append(row, s.u);
    detail::append(row, s.state.lambda_x);
    detail::append(row, s.state.lambda_v);
    detail::write_row(os, row);
  }
}

inline void write_sequence_csv(std::ostream& os, const IterateSequence& seq,
                               const ObjectiveOracle& oracle, std::size_t stride) {
  detail::write_row(os, discrete_csv_header(oracle.dim()));
  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    if (k % stride != 0 && k + 1 != seq.points.size()) continue;
    const Vector& x = seq.points[k];
    std::vector<std::string> row{std::to_string(k)};
    detail::append(row, x);
    row.push_back(format_csv_double(oracle.value(x)));
    row.push_back(format_csv_double(oracle.gradient(x).norm()));
    detail::write_row(os, row);
  }
}

inline void write_csv(std::ostream& os, const RunResult& r) {
  if (r.trajectory)
    write_trajectory_csv(os, *r.trajectory, r.problem.oracle.dim());
  else
    write_sequence_csv(os, *r.sequence, r.problem.oracle, static_cast<std::size_t>(r.config.output.stride));
}

// Summary

inline nlohmann::ordered_json summary_json(const RunResult& r) {
  using nlohmann::ordered_json;
  const auto& o = r.problem.oracle;
  ordered_json j;
  j["name"] = r.config.name;
  j["seed"] = r.config.seed;
  j["problem"] = {{"name", r.config.problem.name}, {"dim", o.dim()}};
  j["method"] = r.config.method;
  if (r.trajectory) {
    j["controller"] = std::string(to_string(r.config.flow.controller));
    j["metric"] = std::string(to_string(r.config.flow.metric));
    j["integrator"] = std::string(to_string(r.config.flow.integrator));
    j["mode"] = std::string(to_string(r.config.flow.mode));
  }
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  j["exit_code"] = r.exit_code;

  ordered_json fin;
  std::vector<DecadeHit> hits;
  if (r.trajectory) {
    const auto& t = *r.trajectory;
    const auto& s = t.final_sample();
    const auto res = terminal_residuals(s.state, o);
    j["steps"] = t.steps;
    fin["t"] = s.state.t;
    fin["E"] = s.E;
    fin["grad_norm"] = s.grad_norm;
    fin["v_norm"] = res.r_v;
    fin["V"] = s.V;
    fin["residuals"] = {{"r_grad", res.r_grad},
                        {"r_v", res.r_v},
                        {"r_lambda_x", res.r_lambda_x},
                        {"r_lambda_v", res.r_lambda_v}};
    fin["x"] = std::vector<double>(s.state.x.data(), s.state.x.data() + s.state.x.size());
    hits = t.decade_hits;
  } else {
    const auto& seq = *r.sequence;
    const Vector& x = seq.points.back();
    j["iterations"] = seq.iterations();
    fin["E"] = o.value(x);
    fin["grad_norm"] = o.gradient(x).norm();
    fin["x"] = std::vector<double>(x.data(), x.data() + x.size());
    hits = sequence_decades(seq, o);
  }
  j["final"] = fin;
  ordered_json tt = ordered_json::array();
  for (const auto& h : hits) {
    ordered_json e;
    e["tol"] = std::pow(10.0, -h.exponent);
    if (r.trajectory) e["t"] = h.t;
    e["step"] = h.step;
    tt.push_back(e);
  }
  j["time_to_tolerance"] = tt;
  j["verification"] = to_json(r.report);
  const std::string stem = r.config.stem();
  j["artifacts"] = {{"trajectory", stem + ".csv"},
                    {"summary", stem + ".summary.json"},
                    {"resolved_config", stem + ".resolved.yaml"}};
  return j;
}

// Files

/// Writes content to path via a temporary file in the same directory and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

struct ArtifactPaths {
  std::filesystem::path trajectory, summary, resolved_config;
};

inline ArtifactPaths write_artifacts(const RunResult& r) {
  const std::filesystem::path dir(r.config.output.dir);
  const std::string stem = r.config.stem();
  ArtifactPaths paths{dir / (stem + ".csv"), dir / (stem + ".summary.json"),
                      dir / (stem + ".resolved.yaml")};
  std::ostringstream csv;
  write_csv(csv, r);
  write_atomic(paths.trajectory, csv.str());
  write_atomic(paths.summary, summary_json(r).dump(2) + "\n");
  write_atomic(paths.resolved_config, emit_config(r.config));
  return paths;
}

// Reading trajectories back for offline verification

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size() && !(c == "nan" || c == "-nan" || c == "inf" || c == "-inf"))
        throw std::runtime_error("CSV line " + std::to_string(lineno) + ": bad number '" + c + "'");
      if (used != c.size()) x = c[0] == '-' ? -std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::infinity();
      if (c == "nan" || c == "-nan") x = std::numeric_limits<double>::quiet_NaN();
      row.push_back(x);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Rebuilds a trajectory from its CSV. Status is inferred from the final state.
inline TrajectoryRecord trajectory_from_csv(const CsvTable& t, const RunConfig& cfg,
                                            const ObjectiveOracle& oracle) {
  const Eigen::Index n = oracle.dim();
  if (t.header != flow_csv_header(n))
    throw std::runtime_error("CSV header does not match a flow trajectory of dimension " +
                             std::to_string(n));
  TrajectoryRecord rec;
  rec.meta.mode = cfg.flow.mode;
  rec.meta.h = cfg.flow.h;
  rec.meta.integrator = cfg.flow.integrator;
  rec.meta.family = cfg.flow.controller;
  rec.meta.metric = cfg.flow.metric;
  for (const auto& row : t.rows) {
    std::size_t c = 0;
    auto take = [&](Eigen::Index m) {
      Vector v(m);
      for (Eigen::Index i = 0; i < m; ++i) v[i] = row[c++];
      return v;
    };
    TrajectorySample s;
    s.state.t = row[c++];
    s.state.x = take(n);
    s.state.v = take(n);
    s.E = row[c++];
    s.grad_norm = row[c++];
    s.V = row[c++];
    s.lieV = row[c++];
    s.state.y = row[c++];
    s.u = take(n);
    s.state.lambda_x = take(n);
    s.state.lambda_v = take(n);
    s.state.lambda_y = 1;
    rec.samples.push_back(std::move(s));
  }
  if (rec.samples.empty()) throw std::runtime_error("CSV has no samples");
  const auto& last = rec.samples.back().state;
  if (!last.finite()) rec.status = FlowStatus::Diverged;
  else if (oracle.gradient(last.x).norm() <= cfg.flow.tol_g && last.v.norm() <= cfg.flow.tol_v)
    rec.status = FlowStatus::Converged;
  return rec;
}

inline IterateSequence sequence_from_csv(const CsvTable& t, const ObjectiveOracle& oracle) {
  const Eigen::Index n = oracle.dim();
  if (t.header != discrete_csv_header(n))
    throw std::runtime_error("CSV header does not match an iterate sequence of dimension " +
                             std::to_string(n));
  IterateSequence seq;
  for (const auto& row : t.rows) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = row[1 + i];
    seq.points.push_back(std::move(x));
  }
  if (seq.points.empty()) throw std::runtime_error("CSV has no iterates");
  return seq;
}

// Comparison table

struct CompareRow {
  std::string name;
  std::string method;
  std::string status;
  /// "time" for flows, "iterations" for discrete methods.
  std::string unit;
  std::vector<std::optional<double>> to_decade;
  double final_E = 0;
  double final_grad_norm = 0;
};

inline CompareRow compare_row(const RunResult& r, int decades) {
  CompareRow row;
  row.name = r.config.name;
  row.method = r.config.is_flow()
                   ? "flow/" + std::string(to_string(r.config.flow.controller)) + "/" +
                         std::string(to_string(r.config.flow.metric))
                   : r.config.method;
  row.status = r.status;
  row.unit = r.trajectory ? "time" : "iterations";
  std::vector<DecadeHit> hits = r.trajectory ? r.trajectory->decade_hits
                                             : sequence_decades(*r.sequence, r.problem.oracle);
  row.to_decade.assign(static_cast<std::size_t>(decades + 1), std::nullopt);
  for (const auto& h : hits)
    if (h.exponent <= decades) row.to_decade[h.exponent] = r.trajectory ? h.t : double(h.step);
  const Vector x = r.trajectory ? r.trajectory->final_sample().state.x : r.sequence->points.back();
  row.final_E = r.problem.oracle.value(x);
  row.final_grad_norm = r.problem.oracle.gradient(x).norm();
  return row;
}

inline void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows, int decades) {
  std::vector<std::string> header{"name", "method", "status", "unit"};
  for (int k = 0; k <= decades; ++k) header.push_back("grad_le_1e-" + std::to_string(k));
  header.emplace_back("final_E");
  header.emplace_back("final_grad_norm");
  detail::write_row(os, header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.name, r.method, r.status, r.unit};
    for (const auto& c : r.to_decade) cells.push_back(c ? format_csv_double(*c) : "NA");
    cells.push_back(format_csv_double(r.final_E));
    cells.push_back(format_csv_double(r.final_grad_norm));
    detail::write_row(os, cells);
  }
}

}  // namespace accel::app
