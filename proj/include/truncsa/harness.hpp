#ifndef TRUNCSA_HARNESS_HPP
#define TRUNCSA_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "truncsa/engine.hpp"
#include "truncsa/models.hpp"

namespace truncsa {

/// A replication experiment: run n_reps independent trajectories of the same
/// bundle and aggregate deviation quantiles at checkpoints.
///
/// Replication k is seeded by replication_seed(base_seed, k) (or by
/// explicit_seeds[k] when given); its initial point is drawn from a stream
/// derived from that seed, so the trajectory stream is untouched by the draw.
struct ReplicatePlan {
  std::function<ModelBundle()> make_bundle;  // fresh bundle per worker
  long horizon = 1000;
  std::vector<long> checkpoints;  // ascending, last one <= horizon
  long n_reps = 30;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::optional<double> init_fixed;
  std::optional<std::pair<double, double>> init_range;  // overrides bundle default
  std::optional<std::vector<std::uint64_t>> explicit_seeds;
};

struct ReplicationOutcome {
  long index = 0;
  std::uint64_t seed = 0;
  Vec z0;
  std::vector<double> checkpoint_error;    // |Z_cp - z0_true|
  std::vector<double> window_trunc_rate;   // truncated fraction over (cp_{k-1}, cp_k]
  double final_error = 0.0;
  bool poisoned = false;
  long poison_t = -1;
  std::string poison_reason;
};

struct QuantileRow {
  long t = 0;
  double median = 0.0, q10 = 0.0, q90 = 0.0;
  double trunc_rate = 0.0;  // mean truncation activity over the window ending at t
};

struct ReplicationSummary {
  std::uint64_t base_seed = 0;
  long n_reps = 0;
  long horizon = 0;
  std::string model;
  std::vector<long> checkpoints;
  std::vector<QuantileRow> rows;
  std::vector<ReplicationOutcome> replications;  // ordered by index
  std::vector<long> poisoned;                    // indices
  bool quantiles_reliable = false;               // >= 30 completed replications
};

/// Interpolated order statistic (linear between adjacent ranks) of an
/// already sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace detail {

constexpr std::uint64_t kInitTag = 0x696e6974;  // draw stream for Z_0

inline ReplicationOutcome run_replication(const ReplicatePlan& plan, long k) {
  ReplicationOutcome out;
  out.index = k;
  out.seed = plan.explicit_seeds ? (*plan.explicit_seeds)[static_cast<std::size_t>(k)]
                                 : replication_seed(plan.base_seed, static_cast<std::uint64_t>(k));
  const std::size_t ncp = plan.checkpoints.size();
  out.checkpoint_error.assign(ncp, 0.0);
  out.window_trunc_rate.assign(ncp, 0.0);
  try {
    const ModelBundle bundle = plan.make_bundle();
    if (bundle.z0_true.empty())
      throw std::invalid_argument("replicate: bundle does not declare its root");

    double z0v;
    if (plan.init_fixed) {
      z0v = *plan.init_fixed;
    } else {
      double lo = bundle.init_lo, hi = bundle.init_hi;
      if (plan.init_range) {
        lo = plan.init_range->first;
        hi = plan.init_range->second;
      }
      Rng init_rng(derive_seed(out.seed, kInitTag));
      z0v = init_rng.uniform(lo, hi);
    }
    out.z0 = {z0v};

    std::size_t cp = 0;
    long window_started = 0;
    long window_truncs = 0;
    const TrajectoryRecord rec =
        run(bundle.drive, bundle.step, bundle.truncation, out.z0, plan.horizon, out.seed,
            plan.horizon, bundle.x0, [&](const StepOutcome& o) {
              if (o.truncated) ++window_truncs;
              if (cp < ncp && o.t == plan.checkpoints[cp]) {
                out.checkpoint_error[cp] = norm2(sub(*o.z_post, bundle.z0_true));
                const long len = o.t - window_started;
                out.window_trunc_rate[cp] =
                    len > 0 ? static_cast<double>(window_truncs) / static_cast<double>(len) : 0.0;
                window_started = o.t;
                window_truncs = 0;
                ++cp;
              }
            });
    out.final_error = norm2(sub(rec.z_final, bundle.z0_true));
  } catch (const TrajectoryError& e) {
    out.poisoned = true;
    out.poison_t = e.t;
    out.poison_reason = e.what();
  } catch (const std::exception& e) {
    // anything else still must not escape a worker thread
    out.poisoned = true;
    out.poison_t = -1;
    out.poison_reason = e.what();
  }
  return out;
}

}  // namespace detail

/// Runs the replications (in parallel when threads > 1) and aggregates.
/// Results are reduced in replication order, so serial and parallel execution
/// produce identical summaries. Poisoned replications are kept, flagged, and
/// excluded from the quantiles.
inline ReplicationSummary replicate(const ReplicatePlan& plan) {
  if (!plan.make_bundle) throw std::invalid_argument("replicate: make_bundle is required");
  if (plan.n_reps < 1) throw std::invalid_argument("replicate: n_reps must be >= 1");
  if (plan.horizon < 1) throw std::invalid_argument("replicate: horizon must be >= 1");
  if (plan.checkpoints.empty()) throw std::invalid_argument("replicate: checkpoints required");
  for (std::size_t i = 0; i < plan.checkpoints.size(); ++i) {
    if (plan.checkpoints[i] < 1 || plan.checkpoints[i] > plan.horizon)
      throw std::invalid_argument("replicate: checkpoints must lie in [1, horizon]");
    if (i > 0 && plan.checkpoints[i] <= plan.checkpoints[i - 1])
      throw std::invalid_argument("replicate: checkpoints must be strictly increasing");
  }
  if (plan.explicit_seeds && static_cast<long>(plan.explicit_seeds->size()) != plan.n_reps)
    throw std::invalid_argument("replicate: explicit_seeds must have n_reps entries");
  const std::string model_name = plan.make_bundle().name;  // fail fast on a broken factory

  std::vector<ReplicationOutcome> results(static_cast<std::size_t>(plan.n_reps));
  int threads = plan.threads > 0 ? plan.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(plan.n_reps)));

  if (threads == 1) {
    for (long k = 0; k < plan.n_reps; ++k)
      results[static_cast<std::size_t>(k)] = detail::run_replication(plan, k);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const long k = next.fetch_add(1);
          if (k >= plan.n_reps) return;
          results[static_cast<std::size_t>(k)] = detail::run_replication(plan, k);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  ReplicationSummary s;
  s.base_seed = plan.base_seed;
  s.n_reps = plan.n_reps;
  s.horizon = plan.horizon;
  s.model = model_name;
  s.checkpoints = plan.checkpoints;
  s.replications = std::move(results);

  long completed = 0;
  for (const auto& r : s.replications) {
    if (r.poisoned)
      s.poisoned.push_back(r.index);
    else
      ++completed;
  }
  s.quantiles_reliable = completed >= 30;

  for (std::size_t c = 0; c < plan.checkpoints.size(); ++c) {
    std::vector<double> errs;
    double rate_sum = 0.0;
    errs.reserve(static_cast<std::size_t>(completed));
    for (const auto& r : s.replications) {
      if (r.poisoned) continue;
      errs.push_back(r.checkpoint_error[c]);
      rate_sum += r.window_trunc_rate[c];
    }
    QuantileRow row;
    row.t = plan.checkpoints[c];
    if (!errs.empty()) {
      std::sort(errs.begin(), errs.end());
      row.median = quantile_sorted(errs, 0.5);
      row.q10 = quantile_sorted(errs, 0.1);
      row.q90 = quantile_sorted(errs, 0.9);
      row.trunc_rate = rate_sum / static_cast<double>(errs.size());
    }
    s.rows.push_back(row);
  }
  return s;
}

struct ConvergenceVerdict {
  bool converging = false;
  double ratio = 0.0;       // first-checkpoint median over last-checkpoint median
  bool ratio_finite = true;
  double decay_factor = 0.0;
};

/// "Converging" means the last-checkpoint median error fell below the first
/// checkpoint's divided by decay_factor. A finite-horizon stand-in for an
/// almost-sure limit; the factor is configurable and always reported.
inline ConvergenceVerdict convergence_verdict(const ReplicationSummary& s, double decay_factor) {
  if (s.rows.size() < 2)
    throw std::invalid_argument("convergence_verdict: need at least two checkpoints");
  if (!(decay_factor > 1.0))
    throw std::invalid_argument("convergence_verdict: decay_factor must be > 1");
  const double first = s.rows.front().median;
  const double last = s.rows.back().median;
  ConvergenceVerdict v;
  v.decay_factor = decay_factor;
  if (last == 0.0) {
    v.converging = true;  // already at the root (noise-free fixed point)
    v.ratio_finite = false;
  } else {
    v.ratio = first / last;
    v.converging = last <= first / decay_factor;
  }
  return v;
}

}  // namespace truncsa

#endif  // TRUNCSA_HARNESS_HPP
