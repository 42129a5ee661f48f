#ifndef TRUNCSA_CONFIG_HPP
#define TRUNCSA_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "truncsa/diagnostics.hpp"
#include "truncsa/harness.hpp"
#include "truncsa/models.hpp"

namespace truncsa {

/// Config load/validation failure; carries one message per offending key.
struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ConfigError(std::vector<std::string> issues_)
      : std::runtime_error(join(issues_)), issues(std::move(issues_)) {}

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& m : v) s += "\n  - " + m;
    return s;
  }
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace cfgdetail

/// Experiment description: a flat, typed key = value text format with dotted
/// section keys (full grammar in the README). Unknown keys are rejected and
/// every numeric parameter is validated against the owning module's
/// preconditions at load time, all offenses reported at once.
struct ExperimentConfig {
  // model
  std::string model_name;  // poly | gamma | ar1
  std::map<std::string, double> model_params;
  std::string noise_kind = "gaussian";  // gaussian | laplace | student_t | none
  bool noise_log_growth = false;

  // overrides (model_default keeps the bundle's own choice)
  std::string step_kind = "model_default";  // model_default | one_over_t | constant | power
  std::vector<double> step_params;
  std::string schedule_kind = "model_default";
  // model_default | none | power | log | linear | log_sqrt_inverse |
  // log_sqrt_lower_only | shrinking_mean
  std::vector<double> schedule_params;

  // initial point
  std::string init_kind = "model_default";  // model_default | fixed | uniform
  double init_value = 0.0;
  double init_lo = 0.0, init_hi = 0.0;

  long horizon = 1000;
  long record_every = 1;
  std::uint64_t seed = 1;

  bool diagnostics_enabled = false;
  bool diag_write_steps = false;
  DiagnosticsConfig diagnostics;

  long n_reps = 30;
  std::vector<long> checkpoints;
  double decay_factor = 10.0;
  bool write_finals = false;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse(const std::string& text);

  /// Canonical form: sorted keys, floats at 17 significant digits. Parsing the
  /// canonical form reproduces this config exactly.
  std::string canonical() const;

  /// Builds the model bundle, applying step/schedule/init overrides; throws
  /// ConfigError with every violated precondition.
  ModelBundle make_bundle() const;

  ReplicatePlan make_plan() const;
};

namespace cfgdetail {

struct RawConfig {
  std::map<std::string, std::string> kv;
  std::vector<std::string> issues;
  std::set<std::string> consumed;

  bool has(const std::string& k) const { return kv.count(k) != 0; }

  std::optional<std::string> take(const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    consumed.insert(k);
    return it->second;
  }

  double take_double(const std::string& k, double dflt) {
    auto v = take(k);
    if (!v) return dflt;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      issues.push_back(k + ": not a number ('" + *v + "')");
      return dflt;
    }
  }

  long take_long(const std::string& k, long dflt) {
    auto v = take(k);
    if (!v) return dflt;
    try {
      std::size_t pos = 0;
      const long d = std::stol(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      issues.push_back(k + ": not an integer ('" + *v + "')");
      return dflt;
    }
  }

  std::uint64_t take_u64(const std::string& k, std::uint64_t dflt) {
    auto v = take(k);
    if (!v) return dflt;
    try {
      std::size_t pos = 0;
      const unsigned long long d = std::stoull(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      issues.push_back(k + ": not an unsigned integer ('" + *v + "')");
      return dflt;
    }
  }

  bool take_bool(const std::string& k, bool dflt) {
    auto v = take(k);
    if (!v) return dflt;
    if (*v == "true") return true;
    if (*v == "false") return false;
    issues.push_back(k + ": expected true or false ('" + *v + "')");
    return dflt;
  }

  std::string take_string(const std::string& k, const std::string& dflt) {
    auto v = take(k);
    return v ? *v : dflt;
  }

  std::vector<double> take_doubles(const std::string& k, std::vector<double> dflt) {
    auto v = take(k);
    if (!v) return dflt;
    std::vector<double> out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument("");
      } catch (...) {
        issues.push_back(k + ": not a list of numbers ('" + *v + "')");
        return dflt;
      }
    }
    return out;
  }

  std::vector<long> take_longs(const std::string& k, std::vector<long> dflt) {
    auto v = take(k);
    if (!v) return dflt;
    std::vector<long> out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stol(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument("");
      } catch (...) {
        issues.push_back(k + ": not a list of integers ('" + *v + "')");
        return dflt;
      }
    }
    return out;
  }
};

inline RawConfig parse_raw(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      raw.issues.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string val = trim(trimmed.substr(eq + 1));
    if (key.empty() || val.empty()) {
      raw.issues.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (raw.kv.count(key)) raw.issues.push_back(key + ": duplicate key");
    raw.kv[key] = val;
  }
  return raw;
}

inline NoiseSpec::Kind parse_noise_kind(const std::string& s, std::vector<std::string>& issues) {
  if (s == "gaussian") return NoiseSpec::Kind::Gaussian;
  if (s == "laplace") return NoiseSpec::Kind::Laplace;
  if (s == "student_t") return NoiseSpec::Kind::StudentT;
  if (s == "none") return NoiseSpec::Kind::None;
  issues.push_back("model.noise_kind: unknown kind '" + s + "'");
  return NoiseSpec::Kind::Gaussian;
}

}  // namespace cfgdetail

inline ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  using namespace cfgdetail;
  RawConfig raw = parse_raw(text);
  ExperimentConfig c;

  c.model_name = raw.take_string("model.name", "");
  if (c.model_name.empty()) raw.issues.push_back("model.name: required (poly | gamma | ar1)");

  // model.params.* are collected as a flat name -> number map
  for (const auto& [k, v] : raw.kv) {
    if (k.rfind("model.params.", 0) == 0) {
      const std::string name = k.substr(std::string("model.params.").size());
      c.model_params[name] = raw.take_double(k, 0.0);
    }
  }
  c.noise_kind = raw.take_string("model.noise_kind", c.noise_kind);
  c.noise_log_growth = raw.take_bool("model.noise_log_growth", c.noise_log_growth);

  c.step_kind = raw.take_string("step.kind", c.step_kind);
  c.step_params = raw.take_doubles("step.params", {});
  c.schedule_kind = raw.take_string("schedule.kind", c.schedule_kind);
  c.schedule_params = raw.take_doubles("schedule.params", {});

  c.init_kind = raw.take_string("init.kind", c.init_kind);
  c.init_value = raw.take_double("init.value", 0.0);
  c.init_lo = raw.take_double("init.lo", 0.0);
  c.init_hi = raw.take_double("init.hi", 0.0);

  c.horizon = raw.take_long("horizon", c.horizon);
  c.record_every = raw.take_long("record_every", c.record_every);
  c.seed = raw.take_u64("seed", c.seed);

  c.diagnostics_enabled = raw.take_bool("diagnostics.enabled", false);
  c.diag_write_steps = raw.take_bool("diagnostics.write_steps", false);
  c.diagnostics.pathwise = raw.take_bool("diagnostics.pathwise", true);
  c.diagnostics.uniform = raw.take_bool("diagnostics.uniform", true);
  c.diagnostics.grid = raw.take_long("diagnostics.grid", c.diagnostics.grid);
  c.diagnostics.window = raw.take_double("diagnostics.window", c.diagnostics.window);
  c.diagnostics.epsilons = raw.take_doubles("diagnostics.epsilons", c.diagnostics.epsilons);
  c.diagnostics.mc_n = raw.take_long("diagnostics.mc_n", c.diagnostics.mc_n);
  c.diagnostics.tail_summable =
      raw.take_double("diagnostics.tail_summable", c.diagnostics.tail_summable);
  c.diagnostics.tail_diverging =
      raw.take_double("diagnostics.tail_diverging", c.diagnostics.tail_diverging);
  c.diagnostics.v_osc_tol = raw.take_double("diagnostics.v_osc_tol", c.diagnostics.v_osc_tol);

  c.n_reps = raw.take_long("replicate.n_reps", c.n_reps);
  c.checkpoints = raw.take_longs("replicate.checkpoints", {});
  c.decay_factor = raw.take_double("replicate.decay_factor", c.decay_factor);
  c.write_finals = raw.take_bool("replicate.write_finals", false);

  for (const auto& [k, v] : raw.kv)
    if (!raw.consumed.count(k)) raw.issues.push_back(k + ": unknown key");

  // structural validation
  if (c.horizon < 1) raw.issues.push_back("horizon: must be >= 1");
  if (c.record_every < 1) raw.issues.push_back("record_every: must be >= 1");
  if (c.n_reps < 1) raw.issues.push_back("replicate.n_reps: must be >= 1");
  for (long cp : c.checkpoints)
    if (cp < 1 || cp > c.horizon)
      raw.issues.push_back("replicate.checkpoints: " + std::to_string(cp) +
                           " outside [1, horizon]");
  for (std::size_t i = 1; i < c.checkpoints.size(); ++i)
    if (c.checkpoints[i] <= c.checkpoints[i - 1])
      raw.issues.push_back("replicate.checkpoints: must be strictly increasing");
  if (!(c.decay_factor > 1.0)) raw.issues.push_back("replicate.decay_factor: must be > 1");
  if (c.diagnostics.grid < 2) raw.issues.push_back("diagnostics.grid: must be >= 2");
  if (!(c.diagnostics.window > 0)) raw.issues.push_back("diagnostics.window: must be > 0");
  for (double e : c.diagnostics.epsilons)
    if (!(e > 0.0 && e < 1.0)) raw.issues.push_back("diagnostics.epsilons: must lie in (0, 1)");
  if (c.diagnostics.mc_n < 2) raw.issues.push_back("diagnostics.mc_n: must be >= 2");
  if (c.init_kind == "uniform" && !(c.init_lo < c.init_hi))
    raw.issues.push_back("init.lo/init.hi: need init.lo < init.hi");
  if (c.init_kind != "model_default" && c.init_kind != "fixed" && c.init_kind != "uniform")
    raw.issues.push_back("init.kind: unknown kind '" + c.init_kind + "'");

  // model-level validation via the owning factories
  if (raw.issues.empty()) {
    try {
      (void)c.make_bundle();
    } catch (const ConfigError& e) {
      for (const auto& m : e.issues) raw.issues.push_back(m);
    } catch (const std::exception& e) {
      raw.issues.push_back(e.what());
    }
  }

  if (!raw.issues.empty()) throw ConfigError(raw.issues);
  return c;
}

inline ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ConfigError({"cannot open config file: " + path});
  std::string text;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
  std::fclose(f);
  return parse(text);
}

inline std::string ExperimentConfig::canonical() const {
  using cfgdetail::fmt_double;
  std::map<std::string, std::string> kv;
  kv["model.name"] = model_name;
  for (const auto& [k, v] : model_params) kv["model.params." + k] = fmt_double(v);
  kv["model.noise_kind"] = noise_kind;
  kv["model.noise_log_growth"] = noise_log_growth ? "true" : "false";
  kv["step.kind"] = step_kind;
  if (!step_params.empty()) {
    std::string s;
    for (double v : step_params) s += (s.empty() ? "" : " ") + fmt_double(v);
    kv["step.params"] = s;
  }
  kv["schedule.kind"] = schedule_kind;
  if (!schedule_params.empty()) {
    std::string s;
    for (double v : schedule_params) s += (s.empty() ? "" : " ") + fmt_double(v);
    kv["schedule.params"] = s;
  }
  kv["init.kind"] = init_kind;
  if (init_kind == "fixed") kv["init.value"] = fmt_double(init_value);
  if (init_kind == "uniform") {
    kv["init.lo"] = fmt_double(init_lo);
    kv["init.hi"] = fmt_double(init_hi);
  }
  kv["horizon"] = std::to_string(horizon);
  kv["record_every"] = std::to_string(record_every);
  kv["seed"] = std::to_string(seed);
  kv["diagnostics.enabled"] = diagnostics_enabled ? "true" : "false";
  kv["diagnostics.write_steps"] = diag_write_steps ? "true" : "false";
  kv["diagnostics.pathwise"] = diagnostics.pathwise ? "true" : "false";
  kv["diagnostics.uniform"] = diagnostics.uniform ? "true" : "false";
  kv["diagnostics.grid"] = std::to_string(diagnostics.grid);
  kv["diagnostics.window"] = fmt_double(diagnostics.window);
  {
    std::string s;
    for (double v : diagnostics.epsilons) s += (s.empty() ? "" : " ") + fmt_double(v);
    kv["diagnostics.epsilons"] = s;
  }
  kv["diagnostics.mc_n"] = std::to_string(diagnostics.mc_n);
  kv["diagnostics.tail_summable"] = fmt_double(diagnostics.tail_summable);
  kv["diagnostics.tail_diverging"] = fmt_double(diagnostics.tail_diverging);
  kv["diagnostics.v_osc_tol"] = fmt_double(diagnostics.v_osc_tol);
  kv["replicate.n_reps"] = std::to_string(n_reps);
  if (!checkpoints.empty()) {
    std::string s;
    for (long v : checkpoints) s += (s.empty() ? "" : " ") + std::to_string(v);
    kv["replicate.checkpoints"] = s;
  }
  kv["replicate.decay_factor"] = fmt_double(decay_factor);
  kv["replicate.write_finals"] = write_finals ? "true" : "false";

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

namespace cfgdetail {

inline double param_or(const std::map<std::string, double>& params, const std::string& name,
                       double dflt) {
  auto it = params.find(name);
  return it == params.end() ? dflt : it->second;
}

}  // namespace cfgdetail

inline ModelBundle ExperimentConfig::make_bundle() const {
  std::vector<std::string> issues;
  ModelBundle bundle;

  std::set<std::string> allowed;
  NoiseSpec noise;
  noise.kind = cfgdetail::parse_noise_kind(noise_kind, issues);
  noise.log_growth = noise_log_growth;
  noise.sigma = 1.0;

  try {
    if (model_name == "poly") {
      allowed = {"l", "z0", "sigma", "df"};
      const int l = static_cast<int>(cfgdetail::param_or(model_params, "l", 3));
      const double z0 = cfgdetail::param_or(model_params, "z0", 0.0);
      noise.sigma = cfgdetail::param_or(model_params, "sigma", 1.0);
      noise.df = cfgdetail::param_or(model_params, "df", 5.0);
      PolySchedule ps;  // overridden below when schedule.kind is set
      ps.kind = PolySchedule::Kind::Power;
      ps.c = 10.0;
      ps.delta = 0.5 / (2.0 * l);
      bundle = make_polynomial_example(l, z0, noise, ps);
    } else if (model_name == "gamma") {
      allowed = {"theta", "c1", "c2"};
      const double theta = cfgdetail::param_or(model_params, "theta", 1.0);
      const double c1 = cfgdetail::param_or(model_params, "c1", 0.5);
      const double c2 = cfgdetail::param_or(model_params, "c2", 2.0);
      bundle = make_gamma_example(theta, c1, c2);
    } else if (model_name == "ar1") {
      allowed = {"theta", "i0", "x0"};
      const double theta = cfgdetail::param_or(model_params, "theta", 0.5);
      const double i0 = cfgdetail::param_or(model_params, "i0", 1.0);
      const double x0 = cfgdetail::param_or(model_params, "x0", 0.0);
      bundle = make_ar1_example(theta, i0, x0, noise);
    } else {
      issues.push_back("model.name: unknown model '" + model_name + "'");
    }
  } catch (const std::exception& e) {
    issues.push_back(std::string("model.params: ") + e.what());
  }

  for (const auto& [k, v] : model_params)
    if (!allowed.count(k)) issues.push_back("model.params." + k + ": unknown parameter");

  // step override
  try {
    if (step_kind == "one_over_t") {
      bundle.step = one_over_t_step();
    } else if (step_kind == "constant") {
      if (step_params.size() != 1) throw std::invalid_argument("step.params: constant takes {c}");
      const double cst = step_params[0];
      if (!(cst >= 0)) throw std::invalid_argument("step.params: constant step must be >= 0");
      bundle.step = StepSchedule::make_scalar(
          [cst](long, const Vec&, const History&) { return cst; });
    } else if (step_kind == "power") {
      if (step_params.size() != 2)
        throw std::invalid_argument("step.params: power takes {c, p}");
      const double cst = step_params[0], p = step_params[1];
      if (!(cst > 0) || !(p >= 0)) throw std::invalid_argument("step.params: need c > 0, p >= 0");
      bundle.step = StepSchedule::make_scalar([cst, p](long t, const Vec&, const History&) {
        return cst * std::pow(static_cast<double>(t), -p);
      });
    } else if (step_kind != "model_default") {
      throw std::invalid_argument("step.kind: unknown kind '" + step_kind + "'");
    }
  } catch (const std::exception& e) {
    issues.push_back(e.what());
  }

  // schedule override
  try {
    if (schedule_kind == "none") {
      bundle.truncation = untruncated(1);
    } else if (schedule_kind == "power") {
      bundle.truncation = expanding_interval_schedule(ExpandingKind::Power, schedule_params);
    } else if (schedule_kind == "log") {
      bundle.truncation = expanding_interval_schedule(ExpandingKind::Log, schedule_params);
    } else if (schedule_kind == "linear") {
      bundle.truncation = expanding_interval_schedule(ExpandingKind::Linear, schedule_params);
    } else if (schedule_kind == "log_sqrt_inverse") {
      bundle.truncation =
          expanding_interval_schedule(ExpandingKind::LogSqrtInverse, schedule_params);
    } else if (schedule_kind == "log_sqrt_lower_only") {
      bundle.truncation =
          expanding_interval_schedule(ExpandingKind::LogSqrtLowerOnly, schedule_params);
    } else if (schedule_kind == "shrinking_mean") {
      if (schedule_params.size() != 2)
        throw std::invalid_argument("schedule.params: shrinking_mean takes {c, p}");
      const double cst = schedule_params[0], p = schedule_params[1];
      if (!(cst > 0) || !(p >= 0))
        throw std::invalid_argument("schedule.params: need c > 0, p >= 0");
      bundle.truncation = auxiliary_shrinking_schedule(
          [](const History& h) { return Vec{h.mean_through(h.last_index())}; },
          [cst, p](long t) { return cst * std::pow(static_cast<double>(t), -p); });
    } else if (schedule_kind != "model_default") {
      throw std::invalid_argument("schedule.kind: unknown kind '" + schedule_kind + "'");
    }
  } catch (const std::exception& e) {
    issues.push_back(e.what());
  }

  // init override
  if (init_kind == "fixed") {
    bundle.init_lo = bundle.init_hi = init_value;
  } else if (init_kind == "uniform") {
    bundle.init_lo = init_lo;
    bundle.init_hi = init_hi;
  }
  if (model_name == "gamma" && !(bundle.init_lo > 0.0))
    issues.push_back("init: gamma model requires a positive initial point");

  if (!issues.empty()) throw ConfigError(issues);
  return bundle;
}

inline ReplicatePlan ExperimentConfig::make_plan() const {
  ReplicatePlan plan;
  const ExperimentConfig self = *this;
  plan.make_bundle = [self]() { return self.make_bundle(); };
  plan.horizon = horizon;
  plan.checkpoints = checkpoints;
  if (plan.checkpoints.empty()) plan.checkpoints = {horizon};
  plan.n_reps = n_reps;
  plan.base_seed = seed;
  const ModelBundle b = make_bundle();
  if (b.init_lo == b.init_hi)
    plan.init_fixed = b.init_lo;
  else
    plan.init_range = std::make_pair(b.init_lo, b.init_hi);
  return plan;
}

}  // namespace truncsa

#endif  // TRUNCSA_CONFIG_HPP
