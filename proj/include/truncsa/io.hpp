#ifndef TRUNCSA_IO_HPP
#define TRUNCSA_IO_HPP

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "truncsa/diagnostics.hpp"
#include "truncsa/engine.hpp"
#include "truncsa/harness.hpp"

namespace truncsa {

using ordered_json = nlohmann::ordered_json;

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

/// Trajectory CSV: t, z_1..z_m, pre_1..pre_m, truncated, step_norm and any
/// per-step diagnostic columns. diag_rows, when given, must align with
/// record.steps.
inline std::string trajectory_csv(const TrajectoryRecord& rec,
                                  const std::vector<std::string>& diag_cols = {},
                                  const std::vector<std::vector<double>>& diag_rows = {}) {
  if (!diag_cols.empty() && diag_rows.size() != rec.steps.size())
    throw std::invalid_argument("trajectory_csv: diagnostic rows misaligned with records");
  const std::size_t m = rec.z0.size();
  std::string out = "t";
  for (std::size_t i = 1; i <= m; ++i) out += ",z_" + std::to_string(i);
  for (std::size_t i = 1; i <= m; ++i) out += ",pre_" + std::to_string(i);
  out += ",truncated,step_norm";
  for (const auto& c : diag_cols) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < rec.steps.size(); ++r) {
    const StepRecord& s = rec.steps[r];
    out += std::to_string(s.t);
    for (double v : s.z_post) out += "," + fmt17(v);
    for (double v : s.z_pre) out += "," + fmt17(v);
    out += s.truncated ? ",1" : ",0";
    out += "," + fmt17(s.step_norm);
    if (!diag_cols.empty())
      for (double v : diag_rows[r]) out += "," + fmt17(v);
    out += "\n";
  }
  return out;
}

inline ordered_json series_json(const SeriesReport& s) {
  ordered_json j;
  j["total"] = s.total;
  j["tail_increment"] = s.tail_increment;
  j["tail_fraction"] = s.tail_fraction;
  j["verdict"] = s.verdict;
  ordered_json marks = ordered_json::array();
  for (const auto& [t, v] : s.marks) marks.push_back({{"t", t}, {"sum", v}});
  j["partial_sums"] = marks;
  return j;
}

inline ordered_json report_json(const ConditionReport& rep) {
  ordered_json j;
  j["horizon"] = rep.horizon;
  j["z0"] = rep.z0;
  ordered_json params;
  params["grid"] = rep.params.grid;
  params["window"] = rep.params.window;
  params["epsilons"] = rep.params.epsilons;
  params["mc_n"] = rep.params.mc_n;
  params["tail_summable"] = rep.params.tail_summable;
  params["tail_diverging"] = rep.params.tail_diverging;
  params["v_osc_tol"] = rep.params.v_osc_tol;
  j["params"] = params;
  if (rep.has_pathwise) {
    ordered_json l;
    l["pos_drift_norm"] = series_json(rep.pathwise.pos_drift);
    l["neg_drift"] = series_json(rep.pathwise.neg_drift);
    l["v_initial"] = rep.pathwise.v_initial;
    l["v_final"] = rep.pathwise.v_final;
    l["v_tail_max"] = rep.pathwise.v_tail_max;
    l["v_tail_min"] = rep.pathwise.v_tail_min;
    l["v_tail_mean"] = rep.pathwise.v_tail_mean;
    l["v_converged"] = rep.pathwise.v_converged;
    j["pathwise"] = l;
  }
  if (rep.has_uniform) {
    ordered_json c;
    c["sup_drift_step"] = series_json(rep.uniform.sup_drift_step);
    c["sup_regression_step2"] = series_json(rep.uniform.sup_regression_step2);
    c["sup_noise_step2"] = series_json(rep.uniform.sup_noise_step2);
    c["last_sup_drift"] = rep.uniform.last_sup_drift;
    c["last_sup_regression"] = rep.uniform.last_sup_regression;
    c["last_sup_noise"] = rep.uniform.last_sup_noise;
    ordered_json eps = ordered_json::array();
    for (const auto& e : rep.uniform.per_epsilon) {
      ordered_json ej;
      ej["epsilon"] = e.epsilon;
      ej["pull_step_sum"] = series_json(e.pull_step_sum);
      ej["neg_drift_floor_sum"] = series_json(e.neg_drift_floor_sum);
      ej["empty_sets"] = e.empty_sets;
      eps.push_back(ej);
    }
    c["per_epsilon"] = eps;
    c["sign_violations"] = rep.uniform.sign_violations;
    c["empty_mask_steps"] = rep.uniform.empty_mask_steps;
    c["region_unbounded_seen"] = rep.uniform.region_unbounded_seen;
    c["window_edge_hits"] = rep.uniform.window_edge_hits;
    j["uniform"] = c;
  }
  return j;
}

inline ordered_json summary_json(const ReplicationSummary& s, const ConvergenceVerdict* v) {
  ordered_json j;
  j["model"] = s.model;
  j["base_seed"] = s.base_seed;
  j["n_reps"] = s.n_reps;
  j["horizon"] = s.horizon;
  j["checkpoints"] = s.checkpoints;
  ordered_json rows = ordered_json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"t", r.t},
                    {"median", r.median},
                    {"q10", r.q10},
                    {"q90", r.q90},
                    {"trunc_rate", r.trunc_rate}});
  j["quantiles"] = rows;
  j["quantiles_reliable"] = s.quantiles_reliable;
  ordered_json reps = ordered_json::array();
  for (const auto& r : s.replications) {
    ordered_json rj;
    rj["index"] = r.index;
    rj["seed"] = r.seed;
    rj["z0"] = r.z0;
    rj["final_error"] = r.final_error;
    rj["poisoned"] = r.poisoned;
    if (r.poisoned) {
      rj["poison_t"] = r.poison_t;
      rj["poison_reason"] = r.poison_reason;
    }
    reps.push_back(rj);
  }
  j["replications"] = reps;
  j["poisoned"] = s.poisoned;
  if (v) {
    ordered_json vj;
    vj["converging"] = v->converging;
    vj["decay_factor"] = v->decay_factor;
    if (v->ratio_finite)
      vj["ratio"] = v->ratio;
    else
      vj["ratio"] = nullptr;  // last-checkpoint median is exactly zero
    j["verdict"] = vj;
  }
  return j;
}

/// Aligned-column text rendering of a replication summary.
inline std::string summary_text(const ReplicationSummary& s, const ConvergenceVerdict* v) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "model %s  reps %ld  horizon %ld  base_seed %llu\n",
                s.model.c_str(), s.n_reps, s.horizon,
                static_cast<unsigned long long>(s.base_seed));
  out += line;
  std::snprintf(line, sizeof(line), "%12s %14s %14s %14s %12s\n", "t", "median", "q10", "q90",
                "trunc_rate");
  out += line;
  for (const auto& r : s.rows) {
    std::snprintf(line, sizeof(line), "%12ld %14.6g %14.6g %14.6g %12.4g\n", r.t, r.median,
                  r.q10, r.q90, r.trunc_rate);
    out += line;
  }
  if (!s.poisoned.empty()) {
    std::snprintf(line, sizeof(line), "poisoned replications: %zu\n", s.poisoned.size());
    out += line;
  }
  if (v) {
    if (v->ratio_finite)
      std::snprintf(line, sizeof(line), "verdict: %s (ratio %.6g, decay factor %.6g)\n",
                    v->converging ? "converging" : "not converging", v->ratio, v->decay_factor);
    else
      std::snprintf(line, sizeof(line),
                    "verdict: converging (final median exactly zero, decay factor %.6g)\n",
                    v->decay_factor);
    out += line;
  }
  return out;
}

/// Per-replication finals CSV.
inline std::string finals_csv(const ReplicationSummary& s) {
  std::string out = "index,seed,z0,final_error,poisoned\n";
  for (const auto& r : s.replications) {
    out += std::to_string(r.index) + "," + std::to_string(r.seed);
    out += "," + fmt17(r.z0.empty() ? 0.0 : r.z0[0]);
    out += "," + fmt17(r.final_error);
    out += r.poisoned ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace truncsa

#endif  // TRUNCSA_IO_HPP
