#ifndef TRUNCSA_ENGINE_HPP
#define TRUNCSA_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "truncsa/common.hpp"
#include "truncsa/convex.hpp"
#include "truncsa/fields.hpp"
#include "truncsa/history.hpp"
#include "truncsa/rng.hpp"

namespace truncsa {

/// The recursion state: after t steps, z = Z_t and history holds X_0..X_t.
struct SAState {
  long t = 0;
  Vec z;
  History history;
  Rng rng;

  SAState(Vec z0, std::uint64_t seed, double x0 = 0.0)
      : z(std::move(z0)), history(x0), rng(seed) {}
};

/// Everything one step exposes to observers. Pointees are valid only during
/// the observer call.
struct StepOutcome {
  long t = 0;
  const Vec* z_prev = nullptr;
  const Vec* z_pre = nullptr;   // pre-truncation point Z_{t-1} + gamma psi
  const Vec* z_post = nullptr;  // Z_t
  bool truncated = false;
  double step_norm = 0.0;  // |gamma psi|
  const PsiParts* parts = nullptr;
  const ConvexRegion* region = nullptr;  // U_t
  const History* history = nullptr;
};

using StepObserver = std::function<void(const StepOutcome&)>;

struct StepRecord {
  long t = 0;
  Vec z_pre, z_post;
  bool truncated = false;
  double step_norm = 0.0;
};

struct TrajectoryRecord {
  long horizon = 0;
  long record_every = 1;
  std::uint64_t seed = 0;
  Vec z0;
  double x0 = 0.0;
  std::vector<StepRecord> steps;  // every record_every-th step plus the final one
  Vec z_final;
  long truncations = 0;
};

/// One update Z_t = [Z_{t-1} + gamma_t(Z_{t-1}) Psi_t(Z_{t-1})]_{U_t}.
///
/// Order within the step: X_t is observed and appended first; gamma and the
/// regression are then evaluated at the frozen Z_{t-1} (by contract they read
/// observations <= t-1 only, so they are unchanged by X_t); psi consumes X_t;
/// the truncation region may depend on X_t.
inline void sa_step(SAState& s, const DriveField& drive, const StepSchedule& step,
                    const TruncationSchedule& schedule, const StepObserver& observer = {}) {
  const long t = s.t + 1;
  try {
    const double xt = drive.observe ? drive.observe(t, s.history, s.rng) : 0.0;
    s.history.append(xt);

    const Vec z_prev = s.z;
    const PsiParts parts = eval_psi(drive, t, z_prev, s.history);
    const Vec gpsi = step.scaled(t, z_prev, s.history, parts.psi);
    const Vec z_pre = add(z_prev, gpsi);
    if (!all_finite(z_pre)) throw TrajectoryError(t, z_prev, "non-finite pre-truncation point");

    const ConvexRegion region = schedule.generator(t, s.history);
    if (region.dim() != static_cast<int>(z_pre.size()))
      throw std::invalid_argument("truncation region dimension does not match the iterate");
    const bool truncated = !region.contains(z_pre);
    // project() returns z_pre itself when it already lies in U_t, so an
    // untruncated step is bit-identical to the unprojected update.
    Vec z_post = region.project(z_pre);

    s.z = std::move(z_post);
    s.t = t;

    if (observer) {
      StepOutcome o;
      o.t = t;
      o.z_prev = &z_prev;
      o.z_pre = &z_pre;
      o.z_post = &s.z;
      o.truncated = truncated;
      o.step_norm = norm2(gpsi);
      o.parts = &parts;
      o.region = &region;
      o.history = &s.history;
      observer(o);
    }
  } catch (const TrajectoryError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrajectoryError(t, s.z, e.what());
  }
}

/// Applies sa_step `horizon` times from Z_0 = z0. Deterministic given the
/// seed. Records every record_every-th step plus the final one; any step
/// failure propagates with the failing t attached.
inline TrajectoryRecord run(const DriveField& drive, const StepSchedule& step,
                            const TruncationSchedule& schedule, const Vec& z0, long horizon,
                            std::uint64_t seed, long record_every = 1, double x0 = 0.0,
                            const StepObserver& observer = {}) {
  if (horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
  if (record_every < 1) throw std::invalid_argument("run: record_every must be >= 1");
  if (z0.empty() || !all_finite(z0)) throw std::invalid_argument("run: z0 must be finite");

  TrajectoryRecord rec;
  rec.horizon = horizon;
  rec.record_every = record_every;
  rec.seed = seed;
  rec.z0 = z0;
  rec.x0 = x0;

  SAState state(z0, seed, x0);
  const StepObserver capture = [&rec, &observer](const StepOutcome& so) {
    if (observer) observer(so);
    if (so.t % rec.record_every == 0 || so.t == rec.horizon) {
      StepRecord r;
      r.t = so.t;
      r.z_pre = *so.z_pre;
      r.z_post = *so.z_post;
      r.truncated = so.truncated;
      r.step_norm = so.step_norm;
      rec.steps.push_back(std::move(r));
    }
    if (so.truncated) ++rec.truncations;
  };
  for (long t = 1; t <= horizon; ++t) sa_step(state, drive, step, schedule, capture);
  rec.z_final = state.z;
  return rec;
}

}  // namespace truncsa

#endif  // TRUNCSA_ENGINE_HPP
