#ifndef TRUNCSA_FIELDS_HPP
#define TRUNCSA_FIELDS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

#include "truncsa/common.hpp"
#include "truncsa/history.hpp"
#include "truncsa/rng.hpp"

namespace truncsa {

/// The random drive of the recursion: a predictable regression field, a
/// conditionally centered noise field, and the observation process that
/// carries the randomness.
///
/// Index contract (the predictability discipline): at step t,
///   - regression, second_moment, noise_second_moment read history slots
///     <= t-1 only;
///   - noise and psi may additionally read slot t (the newest observation);
///   - observe draws X_t from slots <= t-1 and the supplied generator.
///
/// psi, when set, is the drive evaluated in its literal model form; eval_psi
/// then derives eps = psi - r. Otherwise psi is composed as r + noise.
struct DriveField {
  int dim = 1;
  std::function<Vec(long t, const Vec& z, const History&)> regression;
  std::function<Vec(long t, const Vec& z, const History&)> noise;
  std::function<Vec(long t, const Vec& z, const History&)> psi;
  std::function<double(long t, const Vec& z, const History&)> second_moment;
  std::function<double(long t, const Vec& z, const History&)> noise_second_moment;
  std::function<double(long t, const History&, Rng&)> observe;
  /// True when regression and the second moments do not depend on (t, history)
  /// given z; lets grid monitors cache per-point evaluations.
  bool stationary = false;
};

/// Scalar or matrix-valued predictable step size.
struct StepSchedule {
  enum class Kind { Scalar, Matrix };
  Kind kind = Kind::Scalar;
  std::function<double(long t, const Vec& z, const History&)> scalar;
  std::function<Mat(long t, const Vec& z, const History&)> matrix;

  static StepSchedule make_scalar(std::function<double(long, const Vec&, const History&)> fn) {
    StepSchedule s;
    s.kind = Kind::Scalar;
    s.scalar = std::move(fn);
    return s;
  }

  static StepSchedule make_matrix(std::function<Mat(long, const Vec&, const History&)> fn) {
    StepSchedule s;
    s.kind = Kind::Matrix;
    s.matrix = std::move(fn);
    return s;
  }

  double scalar_at(long t, const Vec& z, const History& h) const {
    if (kind != Kind::Scalar)
      throw std::logic_error("StepSchedule: scalar value requested from a matrix schedule");
    const double g = scalar(t, z, h);
    if (!(g >= 0.0) || !std::isfinite(g))
      throw std::invalid_argument("StepSchedule: scalar step must be finite and >= 0");
    return g;
  }

  /// gamma_t(z) psi, as a scaling or a matrix-vector product.
  Vec scaled(long t, const Vec& z, const History& h, const Vec& psi_val) const {
    if (kind == Kind::Scalar) return scale(scalar_at(t, z, h), psi_val);
    const Mat m = matrix(t, z, h);
    return m.apply(psi_val);
  }
};

struct PsiParts {
  Vec psi, r, eps;
};

/// Evaluates the drive at a frozen point: psi = r + eps with
/// r = regression(t, z, history). Non-finite field output poisons the
/// trajectory with (t, z) attached.
inline PsiParts eval_psi(const DriveField& f, long t, const Vec& z, const History& h) {
  if (!all_finite(z)) throw TrajectoryError(t, z, "non-finite evaluation point");
  PsiParts out;
  out.r = f.regression(t, z, h);
  if (f.psi) {
    out.psi = f.psi(t, z, h);
    out.eps = sub(out.psi, out.r);
  } else {
    out.eps = f.noise(t, z, h);
    out.psi = add(out.r, out.eps);
  }
  if (!all_finite(out.psi) || !all_finite(out.r))
    throw TrajectoryError(t, z, "field produced a non-finite value");
  return out;
}

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

/// Monte Carlo estimate of E{ |Psi_t(z)|^2 | F_{t-1} } by conditionally
/// independent redraws of X_t at fixed (t, z, history). Welford accumulation,
/// so a deterministic drive yields |R|^2 exactly with zero standard error.
/// t must address the newest observation slot (the only one a redraw may
/// overwrite).
inline MomentEstimate second_moment_estimate(const DriveField& f, long t, const Vec& z,
                                             const History& h, long n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("second_moment_estimate: n >= 2 required");
  if (!f.observe)
    throw std::invalid_argument("second_moment_estimate: field has no observation sampler");
  const long last = h.last_index();
  if (t != last && t != last + 1)
    throw std::invalid_argument("second_moment_estimate: t must address the newest observation");
  History scratch = h;
  if (t == last + 1) scratch.append(0.0);
  double mean = 0.0, m2 = 0.0;
  for (long k = 0; k < n; ++k) {
    scratch.set_last(f.observe(t, scratch, rng));
    const PsiParts p = eval_psi(f, t, z, scratch);
    const double q = dot(p.psi, p.psi);
    if (!std::isfinite(q)) throw TrajectoryError(t, z, "non-finite sample in moment estimate");
    const double delta = q - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (q - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace truncsa

#endif  // TRUNCSA_FIELDS_HPP
