#pragma once

// Run configuration: YAML parsing with line-numbered diagnostics and a canonical
// emitter that round-trips losslessly.

#include "accel/control.hpp"
#include "accel/flow.hpp"
#include "accel/metric.hpp"
#include "accel/verify.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace accel::app {

struct ProblemConfig {
  /// quadratic | conditioned_quadratic | rosenbrock | log_sum_exp
  std::string name = "conditioned_quadratic";
  int dim = 10;
  double condition = 100;
  /// Random affine forms for log_sum_exp.
  int rows = 20;
  std::vector<std::vector<double>> Q;
  std::vector<double> x_star;
  std::vector<double> x0;

  bool operator==(const ProblemConfig&) const = default;
};

struct FlowConfig {
  ControlFamily controller = ControlFamily::Direct;
  MetricKind metric = MetricKind::Euclidean;
  double eig_floor = 1e-6;
  std::string qn_init = "identity";  // or "hessian": floored Hessian at x0
  double a = 2, b = 1, c = -1;
  bool pd_hessian_mode = true;
  double delta = 1;
  bool delta_taper = false;
  double rate_eta = 1;
  double gamma_a = 1, gamma_b = 1, gamma_c = 2;
  Integrator integrator = Integrator::RK4;
  FlowMode mode = FlowMode::Reduced;
  double h = 1e-3;
  double t_max = 1e3;
  double tol_g = 1e-6;
  double tol_v = 1e-6;
  double divergence_bound = 1e12;
  std::vector<double> v0;

  bool operator==(const FlowConfig&) const = default;
};

struct DiscreteConfig {
  double alpha = 0.01;
  double beta = 0.9;
  /// nesterov1 gradient-correction weight; unset means alpha * beta.
  std::optional<double> gamma;
  /// Per-step schedules (heavy_ball; cg uses alphas with step_rule schedule and betas
  /// with beta_rule schedule).
  std::vector<double> alphas;
  std::vector<double> betas;
  /// cg: exact | fixed | schedule
  std::string step_rule = "exact";
  /// cg: fletcher_reeves | schedule
  std::string beta_rule = "fletcher_reeves";
  /// accel_newton / accel_qn
  double gamma_a = 1, gamma_b = 2, h = 0.1;
  /// accel_newton only: hessian or euclidean (accel_qn always uses quasi_newton).
  MetricKind metric = MetricKind::Hessian;
  double eig_floor = 1e-6;
  int max_iters = 10000;
  double tol_g = 1e-6;

  bool operator==(const DiscreteConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  int stride = 1;
  /// File stem for artifacts; empty means the run name.
  std::string prefix;

  bool operator==(const OutputConfig&) const = default;
};

struct VerifyConfig {
  /// Subset of: dissipation, adjoint_consistency, singular_arc, stationarity
  std::vector<std::string> checks{"stationarity"};
  DissipationMode dissipation_mode = DissipationMode::Strict;
  double eta = 1;
  double dissipation_tol = 1e-12;
  double adjoint_tol = 1e-8;
  double singular_arc_tol = 1e-8;

  bool operator==(const VerifyConfig&) const = default;
};

inline constexpr std::array<std::string_view, 7> kMethods{
    "flow", "heavy_ball", "nesterov1", "nesterov2", "cg", "accel_newton", "accel_qn"};
inline constexpr std::array<std::string_view, 4> kProblems{"quadratic", "conditioned_quadratic",
                                                           "rosenbrock", "log_sum_exp"};
inline constexpr std::array<std::string_view, 4> kChecks{"dissipation", "adjoint_consistency",
                                                         "singular_arc", "stationarity"};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  ProblemConfig problem;
  std::string method = "flow";
  FlowConfig flow;
  DiscreteConfig discrete;
  OutputConfig output;
  VerifyConfig verify;

  bool is_flow() const { return method == "flow"; }
  std::string stem() const { return output.prefix.empty() ? name : output.prefix; }

  /// Equality of the parts that the canonical form carries: the inactive method
  /// block is not part of a run's identity.
  bool operator==(const RunConfig& o) const {
    return name == o.name && seed == o.seed && problem == o.problem && method == o.method &&
           (is_flow() ? flow == o.flow : discrete == o.discrete) && output == o.output &&
           verify == o.verify;
  }
};

/// Invalid configuration. line/column are 1-based; 0 when unknown.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, int line, int column, std::string message)
      : std::runtime_error(located_message("config", field, line, column, message)),
        field_(std::move(field)), message_(std::move(message)), line_(line), column_(column) {}

  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

  /// "source:line:col: field 'f': message"
  std::string located(const std::string& source) const {
    return located_message(source, field_, line_, column_, message_);
  }

private:
  static std::string located_message(const std::string& source, const std::string& field,
                                     int line, int column, const std::string& message) {
    std::string s = source;
    if (line > 0) s += ":" + std::to_string(line) + ":" + std::to_string(column);
    s += ": ";
    if (!field.empty()) s += "field '" + field + "': ";
    return s + message;
  }

  std::string field_;
  std::string message_;
  int line_;
  int column_;
};

namespace detail {

template <std::size_t N>
std::string join(const std::array<std::string_view, N>& xs) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) s += (i ? ", " : "") + std::string(xs[i]);
  return s;
}

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& xs, std::string_view x) {
  for (auto v : xs)
    if (v == x) return true;
  return false;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return ".nan";
  if (std::isinf(x)) return x > 0 ? ".inf" : "-.inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  // Keep a float-looking token so YAML readers do not take it for an integer.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

/// Walks a YAML mapping, tracking the dotted path for diagnostics and rejecting
/// keys nobody asked for.
class Reader {
public:
  Reader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail(path_, node_, "expected a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(get(key), field(key));
  }

  Reader child(const std::string& key) {
    YAML::Node n = get(key);
    return Reader(n, field(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!seen_.count(key)) fail(field(key), it->first, "unknown key");
    }
  }

  const YAML::Node& node() const { return node_; }

  [[noreturn]] static void fail(const std::string& field, const YAML::Node& n,
                                const std::string& msg) {
    const YAML::Mark m = n.Mark();
    const bool known = m.line >= 0 && m.pos >= 0;
    throw ConfigError(field, known ? m.line + 1 : 0, known ? m.column + 1 : 0, msg);
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& field) {
    if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!n.IsSequence()) fail(field, n, "expected a list of numbers");
      std::vector<double> v;
      for (std::size_t i = 0; i < n.size(); ++i)
        v.push_back(convert<double>(n[i], field + "[" + std::to_string(i) + "]"));
      return v;
    } else if constexpr (std::is_same_v<T, std::vector<std::vector<double>>>) {
      if (!n.IsSequence()) fail(field, n, "expected a list of rows");
      std::vector<std::vector<double>> v;
      for (std::size_t i = 0; i < n.size(); ++i)
        v.push_back(convert<std::vector<double>>(n[i], field + "[" + std::to_string(i) + "]"));
      return v;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!n.IsSequence()) fail(field, n, "expected a list of names");
      std::vector<std::string> v;
      for (std::size_t i = 0; i < n.size(); ++i)
        v.push_back(convert<std::string>(n[i], field + "[" + std::to_string(i) + "]"));
      return v;
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      if (n.IsNull()) return std::nullopt;
      return convert<double>(n, field);
    } else {
      if (!n.IsScalar()) fail(field, n, "expected a scalar");
      try {
        return n.as<T>();
      } catch (const YAML::Exception&) {
        fail(field, n, "cannot read '" + n.Scalar() + "' as " + type_name<T>());
      }
    }
  }

private:
  template <class T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Enum, std::size_t N>
Enum read_enum(Reader& r, const std::string& key, Enum current,
               const std::array<Enum, N>& values) {
  if (!r.has(key)) return current;
  const YAML::Node n = r.get(key);
  const auto s = Reader::convert<std::string>(n, r.field(key));
  std::string expected;
  for (std::size_t i = 0; i < N; ++i) {
    if (to_string(values[i]) == s) return values[i];
    expected += (i ? ", " : "") + std::string(to_string(values[i]));
  }
  Reader::fail(r.field(key), n, "unknown value '" + s + "' (expected one of: " + expected + ")");
}

inline constexpr std::array<ControlFamily, 4> kFamilies{
    ControlFamily::MinP, ControlFamily::MinPStar, ControlFamily::Direct, ControlFamily::FixedGain};
inline constexpr std::array<MetricKind, 3> kMetricKinds{
    MetricKind::Euclidean, MetricKind::Hessian, MetricKind::QuasiNewton};
inline constexpr std::array<Integrator, 2> kIntegrators{Integrator::RK4,
                                                       Integrator::SemiImplicitEuler};
inline constexpr std::array<FlowMode, 2> kModes{FlowMode::Reduced, FlowMode::FullPrimalDual};
inline constexpr std::array<DissipationMode, 2> kDissipationModes{DissipationMode::Strict,
                                                                  DissipationMode::Rate};

inline void require_field(bool cond, Reader& r, const std::string& key, const std::string& msg) {
  if (cond) return;
  if (r.has(key)) Reader::fail(r.field(key), r.get(key), msg);
  Reader::fail(r.field(key), r.node(), msg);
}

}  // namespace detail

/// Parses and validates a configuration document. Throws ConfigError.
inline RunConfig parse_config(const std::string& text) {
  using detail::Reader;
  using detail::require_field;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (root.IsNull()) throw ConfigError("", 0, 0, "empty configuration");

  RunConfig cfg;
  Reader r(root, "");
  r.read("name", cfg.name);
  r.read("seed", cfg.seed);
  require_field(!cfg.name.empty(), r, "name", "must not be empty");
  require_field(cfg.name.find('/') == std::string::npos, r, "name", "must not contain '/'");

  if (!r.has("problem")) Reader::fail("problem", root, "missing required block");
  {
    Reader p = r.child("problem");
    auto& pc = cfg.problem;
    p.read("name", pc.name);
    require_field(detail::contains(kProblems, pc.name), p, "name",
                  "unknown problem '" + pc.name + "' (expected one of: " + detail::join(kProblems) +
                      ")");
    p.read("dim", pc.dim);
    p.read("condition", pc.condition);
    p.read("rows", pc.rows);
    p.read("Q", pc.Q);
    p.read("x_star", pc.x_star);
    p.read("x0", pc.x0);
    if (pc.name == "rosenbrock") {
      if (!p.has("dim")) pc.dim = 2;
      require_field(pc.dim == 2, p, "dim", "rosenbrock is two-dimensional");
    }
    if (pc.name == "quadratic") {
      require_field(!pc.Q.empty(), p, "Q", "quadratic requires Q");
      if (!p.has("dim")) pc.dim = static_cast<int>(pc.Q.size());
      require_field(static_cast<int>(pc.Q.size()) == pc.dim, p, "Q", "Q must have dim rows");
      for (const auto& row : pc.Q)
        require_field(static_cast<int>(row.size()) == pc.dim, p, "Q", "Q must be square");
      require_field(pc.x_star.empty() || static_cast<int>(pc.x_star.size()) == pc.dim, p,
                    "x_star", "length must equal dim");
    } else {
      require_field(pc.Q.empty(), p, "Q", "only the quadratic problem takes Q");
      require_field(pc.x_star.empty(), p, "x_star", "only the quadratic problem takes x_star");
    }
    require_field(pc.dim > 0, p, "dim", "must be positive");
    require_field(pc.condition >= 1, p, "condition", "must be >= 1");
    require_field(pc.rows >= 0, p, "rows", "must be non-negative");
    require_field(pc.x0.empty() || static_cast<int>(pc.x0.size()) == pc.dim, p, "x0",
                  "length must equal dim");
    p.finish();
  }

  if (!r.has("method")) Reader::fail("method", root, "missing required block");
  {
    Reader m = r.child("method");
    m.read("name", cfg.method);
    require_field(detail::contains(kMethods, cfg.method), m, "name",
                  "unknown method '" + cfg.method + "' (expected one of: " +
                      detail::join(kMethods) + ")");
    if (cfg.is_flow()) {
      auto& f = cfg.flow;
      f.controller = detail::read_enum(m, "controller", f.controller, detail::kFamilies);
      f.metric = detail::read_enum(m, "metric", f.metric, detail::kMetricKinds);
      m.read("eig_floor", f.eig_floor);
      m.read("qn_init", f.qn_init);
      require_field(f.qn_init == "identity" || f.qn_init == "hessian", m, "qn_init",
                    "unknown value '" + f.qn_init + "' (expected one of: identity, hessian)");
      if (m.has("clf")) {
        Reader c = m.child("clf");
        c.read("a", f.a);
        c.read("b", f.b);
        c.read("c", f.c);
        c.read("pd_hessian_mode", f.pd_hessian_mode);
        c.finish();
      }
      m.read("delta", f.delta);
      m.read("delta_taper", f.delta_taper);
      m.read("rate_eta", f.rate_eta);
      if (m.has("gains")) {
        Reader g = m.child("gains");
        g.read("gamma_a", f.gamma_a);
        g.read("gamma_b", f.gamma_b);
        g.read("gamma_c", f.gamma_c);
        g.finish();
      }
      f.integrator = detail::read_enum(m, "integrator", f.integrator, detail::kIntegrators);
      f.mode = detail::read_enum(m, "mode", f.mode, detail::kModes);
      m.read("h", f.h);
      m.read("t_max", f.t_max);
      m.read("tol_g", f.tol_g);
      m.read("tol_v", f.tol_v);
      m.read("divergence_bound", f.divergence_bound);
      m.read("v0", f.v0);
      require_field(f.h > 0, m, "h", "must be positive");
      require_field(f.t_max > 0, m, "t_max", "must be positive");
      require_field(f.tol_g >= 0, m, "tol_g", "must be non-negative");
      require_field(f.tol_v >= 0, m, "tol_v", "must be non-negative");
      require_field(f.eig_floor > 0, m, "eig_floor", "must be positive");
      require_field(f.divergence_bound > 0, m, "divergence_bound", "must be positive");
      require_field(f.delta > 0, m, "delta", "must be positive");
      require_field(f.rate_eta > 0, m, "rate_eta", "must be positive");
      require_field(f.v0.empty() || static_cast<int>(f.v0.size()) == cfg.problem.dim, m, "v0",
                    "length must equal problem.dim");
      try {
        ClfParams{f.a, f.b, f.c, f.pd_hessian_mode}.validate();
      } catch (const InvalidArgument& e) {
        require_field(false, m, "clf", e.what());
      }
      if (f.controller == ControlFamily::Direct) {
        const auto rep = validate_direct_gains(ClfParams{f.a, f.b, f.c, f.pd_hessian_mode},
                                               f.gamma_a, f.gamma_b, f.gamma_c);
        std::string msg = "direct gains violate";
        for (const auto& v : rep.violated) msg += " [" + v + "]";
        require_field(rep.holds, m, "gains", msg);
      }
      if (f.controller == ControlFamily::FixedGain)
        require_field(f.gamma_a > 0 && f.gamma_b > 0, m, "gains",
                      "fixed gains must be positive");
    } else {
      auto& d = cfg.discrete;
      m.read("alpha", d.alpha);
      m.read("beta", d.beta);
      m.read("gamma", d.gamma);
      m.read("alphas", d.alphas);
      m.read("betas", d.betas);
      m.read("step_rule", d.step_rule);
      m.read("beta_rule", d.beta_rule);
      if (m.has("gains")) {
        Reader g = m.child("gains");
        g.read("gamma_a", d.gamma_a);
        g.read("gamma_b", d.gamma_b);
        g.finish();
      }
      m.read("h", d.h);
      d.metric = detail::read_enum(m, "metric", d.metric, detail::kMetricKinds);
      require_field(cfg.method != "accel_newton" || d.metric != MetricKind::QuasiNewton, m,
                    "metric", "use method accel_qn for the quasi-Newton metric");
      m.read("eig_floor", d.eig_floor);
      m.read("max_iters", d.max_iters);
      m.read("tol_g", d.tol_g);
      require_field(d.max_iters > 0, m, "max_iters", "must be positive");
      require_field(d.tol_g >= 0, m, "tol_g", "must be non-negative");
      require_field(d.alpha >= 0, m, "alpha", "must be non-negative");
      require_field(d.beta >= 0, m, "beta", "must be non-negative");
      require_field(d.h > 0, m, "h", "must be positive");
      require_field(d.eig_floor > 0, m, "eig_floor", "must be positive");
      require_field(d.step_rule == "exact" || d.step_rule == "fixed" || d.step_rule == "schedule",
                    m, "step_rule", "expected one of: exact, fixed, schedule");
      require_field(d.beta_rule == "fletcher_reeves" || d.beta_rule == "schedule", m,
                    "beta_rule", "expected one of: fletcher_reeves, schedule");
      if (cfg.method == "heavy_ball")
        require_field(d.alphas.size() == d.betas.size(), m, "betas",
                      "schedule lengths of alphas and betas differ");
      if (cfg.method == "cg") {
        if (d.step_rule == "schedule")
          require_field(static_cast<int>(d.alphas.size()) >= d.max_iters, m, "alphas",
                        "schedule shorter than max_iters");
        if (d.beta_rule == "schedule")
          require_field(static_cast<int>(d.betas.size()) >= d.max_iters, m, "betas",
                        "schedule shorter than max_iters");
      }
      if (cfg.method == "accel_newton" || cfg.method == "accel_qn")
        require_field(d.gamma_a > 0 && d.gamma_b > 0, m, "gains", "gains must be positive");
    }
    m.finish();
  }

  if (r.has("output")) {
    Reader o = r.child("output");
    o.read("dir", cfg.output.dir);
    o.read("stride", cfg.output.stride);
    o.read("prefix", cfg.output.prefix);
    require_field(cfg.output.stride >= 1, o, "stride", "must be >= 1");
    require_field(!cfg.output.dir.empty(), o, "dir", "must not be empty");
    o.finish();
  }

  if (r.has("verify")) {
    Reader v = r.child("verify");
    auto& vc = cfg.verify;
    v.read("checks", vc.checks);
    for (const auto& c : vc.checks) {
      require_field(detail::contains(kChecks, c), v, "checks",
                    "unknown check '" + c + "' (expected any of: " + detail::join(kChecks) + ")");
      require_field(cfg.is_flow() || c == "stationarity", v, "checks",
                    "discrete methods only support the stationarity check");
    }
    vc.dissipation_mode =
        detail::read_enum(v, "dissipation_mode", vc.dissipation_mode, detail::kDissipationModes);
    v.read("eta", vc.eta);
    v.read("dissipation_tol", vc.dissipation_tol);
    v.read("adjoint_tol", vc.adjoint_tol);
    v.read("singular_arc_tol", vc.singular_arc_tol);
    require_field(vc.eta > 0, v, "eta", "must be positive");
    v.finish();
  }
  r.finish();
  return cfg;
}

/// Canonical YAML with every field resolved. parse_config(emit_config(c)) == c.
inline std::string emit_config(const RunConfig& cfg) {
  using detail::format_double;
  YAML::Emitter e;
  auto num = [&e](const char* key, double v) { e << YAML::Key << key << YAML::Value << format_double(v); };
  auto vec = [&e](const char* key, const std::vector<double>& v) {
    e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << format_double(x);
    e << YAML::EndSeq;
  };
  auto str = [&e](const char* key, std::string_view v) {
    e << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << std::string(v);
  };
  auto word = [&e](const char* key, std::string_view v) {
    e << YAML::Key << key << YAML::Value << std::string(v);
  };

  e << YAML::BeginMap;
  str("name", cfg.name);
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;

  const auto& p = cfg.problem;
  e << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  word("name", p.name);
  e << YAML::Key << "dim" << YAML::Value << p.dim;
  num("condition", p.condition);
  e << YAML::Key << "rows" << YAML::Value << p.rows;
  if (!p.Q.empty()) {
    e << YAML::Key << "Q" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : p.Q) {
      e << YAML::Flow << YAML::BeginSeq;
      for (double x : row) e << format_double(x);
      e << YAML::EndSeq;
    }
    e << YAML::EndSeq;
  }
  if (!p.x_star.empty()) vec("x_star", p.x_star);
  if (!p.x0.empty()) vec("x0", p.x0);
  e << YAML::EndMap;

  e << YAML::Key << "method" << YAML::Value << YAML::BeginMap;
  word("name", cfg.method);
  if (cfg.is_flow()) {
    const auto& f = cfg.flow;
    word("controller", to_string(f.controller));
    word("metric", to_string(f.metric));
    num("eig_floor", f.eig_floor);
    word("qn_init", f.qn_init);
    e << YAML::Key << "clf" << YAML::Value << YAML::BeginMap;
    num("a", f.a);
    num("b", f.b);
    num("c", f.c);
    e << YAML::Key << "pd_hessian_mode" << YAML::Value << f.pd_hessian_mode;
    e << YAML::EndMap;
    num("delta", f.delta);
    e << YAML::Key << "delta_taper" << YAML::Value << f.delta_taper;
    num("rate_eta", f.rate_eta);
    e << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
    num("gamma_a", f.gamma_a);
    num("gamma_b", f.gamma_b);
    num("gamma_c", f.gamma_c);
    e << YAML::EndMap;
    word("integrator", to_string(f.integrator));
    word("mode", to_string(f.mode));
    num("h", f.h);
    num("t_max", f.t_max);
    num("tol_g", f.tol_g);
    num("tol_v", f.tol_v);
    num("divergence_bound", f.divergence_bound);
    if (!f.v0.empty()) vec("v0", f.v0);
  } else {
    const auto& d = cfg.discrete;
    num("alpha", d.alpha);
    num("beta", d.beta);
    if (d.gamma) num("gamma", *d.gamma);
    if (!d.alphas.empty()) vec("alphas", d.alphas);
    if (!d.betas.empty()) vec("betas", d.betas);
    word("step_rule", d.step_rule);
    word("beta_rule", d.beta_rule);
    e << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
    num("gamma_a", d.gamma_a);
    num("gamma_b", d.gamma_b);
    e << YAML::EndMap;
    num("h", d.h);
    word("metric", to_string(d.metric));
    num("eig_floor", d.eig_floor);
    e << YAML::Key << "max_iters" << YAML::Value << d.max_iters;
    num("tol_g", d.tol_g);
  }
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  str("dir", cfg.output.dir);
  e << YAML::Key << "stride" << YAML::Value << cfg.output.stride;
  str("prefix", cfg.output.prefix);
  e << YAML::EndMap;

  const auto& v = cfg.verify;
  e << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "checks" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& c : v.checks) e << c;
  e << YAML::EndSeq;
  word("dissipation_mode", to_string(v.dissipation_mode));
  num("eta", v.eta);
  num("dissipation_tol", v.dissipation_tol);
  num("adjoint_tol", v.adjoint_tol);
  num("singular_arc_tol", v.singular_arc_tol);
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace accel::app
