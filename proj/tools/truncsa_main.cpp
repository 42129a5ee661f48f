// truncsa: experiment front end for the truncated stochastic approximation
// library. Subcommands: run, replicate, diagnose, specfun-check.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure (poisoned
// trajectory), 4 bound-check failure.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "truncsa/io.hpp"
#include "truncsa/truncsa.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

int env_threads() {
  const char* v = std::getenv("TRUNC_SA_THREADS");
  if (!v) return 0;
  const long n = std::strtol(v, nullptr, 10);
  return n > 0 ? static_cast<int>(n) : 0;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

truncsa::ExperimentConfig load_config(const CommonArgs& args) {
  truncsa::ExperimentConfig cfg = truncsa::ExperimentConfig::parse_file(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

truncsa::Vec resolve_init(const truncsa::ModelBundle& bundle, std::uint64_t seed) {
  if (bundle.init_lo == bundle.init_hi) return {bundle.init_lo};
  truncsa::Rng init_rng(truncsa::derive_seed(seed, 0x696e6974));
  return {init_rng.uniform(bundle.init_lo, bundle.init_hi)};
}

truncsa::ordered_json manifest_json(const std::string& command,
                                    const truncsa::ExperimentConfig& cfg,
                                    const truncsa::Vec& z0) {
  truncsa::ordered_json m;
  m["artifact_version"] = kVersion;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["z0"] = z0;
  m["config_canonical"] = cfg.canonical();
  return m;
}

int cmd_run(const CommonArgs& args) {
  const truncsa::ExperimentConfig cfg = load_config(args);
  const truncsa::ModelBundle bundle = cfg.make_bundle();
  const truncsa::Vec z0 = resolve_init(bundle, cfg.seed);

  std::vector<std::string> diag_cols;
  std::vector<std::vector<double>> diag_rows;
  truncsa::TrajectoryRecord rec;
  if (cfg.diagnostics_enabled) {
    truncsa::DiagnosticsCollector collector(bundle.drive, bundle.step, bundle.z0_true,
                                            truncsa::LyapunovV::quadratic(), cfg.diagnostics,
                                            cfg.horizon);
    diag_cols = collector.columns();
    rec = truncsa::run(bundle.drive, bundle.step, bundle.truncation, z0, cfg.horizon, cfg.seed,
                       cfg.record_every, bundle.x0, [&](const truncsa::StepOutcome& o) {
                         collector.on_step(o);
                         if (o.t % cfg.record_every == 0 || o.t == cfg.horizon)
                           diag_rows.push_back(collector.last_row());
                       });
  } else {
    rec = truncsa::run(bundle.drive, bundle.step, bundle.truncation, z0, cfg.horizon, cfg.seed,
                       cfg.record_every, bundle.x0);
  }

  truncsa::write_file(args.out_dir + "/trajectory.csv",
                      truncsa::trajectory_csv(rec, diag_cols, diag_rows));
  truncsa::write_file(args.out_dir + "/run_manifest.json",
                      manifest_json("run", cfg, z0).dump(2) + "\n");
  std::cout << "run: horizon " << cfg.horizon << ", " << rec.steps.size() << " records, "
            << rec.truncations << " truncations -> " << args.out_dir << "/trajectory.csv\n";
  return 0;
}

int cmd_replicate(const CommonArgs& args) {
  const truncsa::ExperimentConfig cfg = load_config(args);
  truncsa::ReplicatePlan plan = cfg.make_plan();
  plan.threads = env_threads();
  const truncsa::ReplicationSummary summary = truncsa::replicate(plan);
  const truncsa::ConvergenceVerdict verdict =
      summary.rows.size() >= 2 ? truncsa::convergence_verdict(summary, cfg.decay_factor)
                               : truncsa::ConvergenceVerdict{};
  const truncsa::ConvergenceVerdict* vp = summary.rows.size() >= 2 ? &verdict : nullptr;

  truncsa::write_file(args.out_dir + "/summary.json",
                      truncsa::summary_json(summary, vp).dump(2) + "\n");
  truncsa::write_file(args.out_dir + "/summary.txt", truncsa::summary_text(summary, vp));
  if (cfg.write_finals)
    truncsa::write_file(args.out_dir + "/finals.csv", truncsa::finals_csv(summary));
  truncsa::write_file(args.out_dir + "/replicate_manifest.json",
                      manifest_json("replicate", cfg, {}).dump(2) + "\n");
  std::cout << truncsa::summary_text(summary, vp);
  if (!summary.poisoned.empty()) {
    std::cerr << "replicate: " << summary.poisoned.size()
              << " replication(s) aborted; partial results written\n";
    return 3;
  }
  return 0;
}

int cmd_diagnose(const CommonArgs& args) {
  const truncsa::ExperimentConfig cfg = load_config(args);
  if (!cfg.diagnostics_enabled)
    throw truncsa::ConfigError({"diagnostics.enabled: must be true for the diagnose command"});
  const truncsa::ModelBundle bundle = cfg.make_bundle();
  const truncsa::Vec z0 = resolve_init(bundle, cfg.seed);

  truncsa::DiagnosticsCollector collector(bundle.drive, bundle.step, bundle.z0_true,
                                          truncsa::LyapunovV::quadratic(), cfg.diagnostics,
                                          cfg.horizon);
  std::vector<std::vector<double>> diag_rows;
  truncsa::TrajectoryRecord rec =
      truncsa::run(bundle.drive, bundle.step, bundle.truncation, z0, cfg.horizon, cfg.seed,
                   cfg.record_every, bundle.x0, [&](const truncsa::StepOutcome& o) {
                     collector.on_step(o);
                     if (cfg.diag_write_steps &&
                         (o.t % cfg.record_every == 0 || o.t == cfg.horizon))
                       diag_rows.push_back(collector.last_row());
                   });

  const truncsa::ConditionReport report = collector.report();
  truncsa::write_file(args.out_dir + "/diagnosis.json",
                      truncsa::report_json(report).dump(2) + "\n");
  if (cfg.diag_write_steps)
    truncsa::write_file(args.out_dir + "/diag_steps.csv",
                        truncsa::trajectory_csv(rec, collector.columns(), diag_rows));
  truncsa::write_file(args.out_dir + "/diagnose_manifest.json",
                      manifest_json("diagnose", cfg, z0).dump(2) + "\n");

  std::cout << "diagnose: horizon " << cfg.horizon << " -> " << args.out_dir
            << "/diagnosis.json\n";
  if (report.has_pathwise)
    std::cout << "  pos_drift_norm: " << report.pathwise.pos_drift.verdict
              << " (total " << report.pathwise.pos_drift.total << ")\n";
  if (report.has_uniform) {
    std::cout << "  sup_regression_step2: " << report.uniform.sup_regression_step2.verdict
              << (report.uniform.region_unbounded_seen && report.uniform.window_edge_hits > 0
                      ? " [window-limited: sup still growing at the window edge]"
                      : "")
              << "\n";
    for (const auto& e : report.uniform.per_epsilon)
      std::cout << "  pull_step_sum(eps=" << e.epsilon
                << "): " << e.pull_step_sum.verdict << "\n";
  }
  return 0;
}

int cmd_specfun_check(double lo, double hi, long n, const std::string& out_dir) {
  if (!(lo > 0.0) || !(hi > lo))
    throw truncsa::ConfigError({"specfun-check: grid must satisfy 0 < lo < hi"});
  if (n < 2) throw truncsa::ConfigError({"specfun-check: need at least 2 grid points"});

  std::string csv = "x,digamma,trigamma,lower_1_over_x,upper_1px_over_x2,log_x,pass\n";
  long failures = 0;
  const double llo = std::log(lo), lhi = std::log(hi);
  for (long i = 0; i < n; ++i) {
    const double x = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
    const double dg = truncsa::digamma(x);
    const double tg = truncsa::trigamma(x);
    const double lb = 1.0 / x;
    const double ub = (1.0 + x) / (x * x);
    const double lx = std::log(x);
    const double slack = 1e-14 * (1.0 + std::fabs(tg));
    const bool ok = (tg >= lb - slack) && (tg <= ub + slack) &&
                    (dg <= lx + 1e-14 * (1.0 + std::fabs(lx)));
    if (!ok) ++failures;
    csv += truncsa::fmt17(x) + "," + truncsa::fmt17(dg) + "," + truncsa::fmt17(tg) + "," +
           truncsa::fmt17(lb) + "," + truncsa::fmt17(ub) + "," + truncsa::fmt17(lx) +
           (ok ? ",1\n" : ",0\n");
  }
  truncsa::write_file(out_dir + "/specfun_check.csv", csv);
  std::cout << "specfun-check: " << n << " points on [" << lo << ", " << hi << "], "
            << failures << " bound failures -> " << out_dir << "/specfun_check.csv\n";
  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncated stochastic approximation experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "experiment config file")->required();
    sub->add_option("--out", args.out_dir, "output directory (default .)");
    sub->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one trajectory, write CSV + manifest");
  add_common(run_cmd);
  CLI::App* rep_cmd =
      app.add_subcommand("replicate", "run seeded replications, write summary JSON/text");
  add_common(rep_cmd);
  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "run convergence-condition monitors, write report JSON");
  add_common(diag_cmd);

  double sf_lo = 1e-3, sf_hi = 1e3;
  long sf_n = 1000;
  std::string sf_out = ".";
  CLI::App* sf_cmd =
      app.add_subcommand("specfun-check", "verify digamma/trigamma bounds on a log grid");
  sf_cmd->add_option("--lo", sf_lo, "grid lower end (must be > 0)");
  sf_cmd->add_option("--hi", sf_hi, "grid upper end");
  sf_cmd->add_option("--n", sf_n, "number of grid points");
  sf_cmd->add_option("--out", sf_out, "output directory (default .)");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) return cmd_run(args);
    if (rep_cmd->parsed()) return cmd_replicate(args);
    if (diag_cmd->parsed()) return cmd_diagnose(args);
    if (sf_cmd->parsed()) return cmd_specfun_check(sf_lo, sf_hi, sf_n, sf_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const truncsa::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const truncsa::TrajectoryError& e) {
    std::cerr << "trajectory aborted: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
