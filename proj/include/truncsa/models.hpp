#ifndef TRUNCSA_MODELS_HPP
#define TRUNCSA_MODELS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "truncsa/convex.hpp"
#include "truncsa/engine.hpp"
#include "truncsa/fields.hpp"
#include "truncsa/specfun.hpp"

namespace truncsa {

/// Zero-mean, unit-variance innovation family, optionally scaled by sigma and
/// by a slowly growing factor (sigma_t^2 = sigma^2 log t) to exercise
/// unbounded conditional variances.
struct NoiseSpec {
  enum class Kind { None, Gaussian, Laplace, StudentT };
  Kind kind = Kind::Gaussian;
  double sigma = 1.0;
  double df = 5.0;  // StudentT only
  bool log_growth = false;

  void validate() const {
    if (kind == Kind::None) return;
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("NoiseSpec: sigma must be finite and > 0");
    if (kind == Kind::StudentT && !(df > 2.0))
      throw std::invalid_argument("NoiseSpec: student-t df must be > 2");
  }

  double sigma_at(long t) const {
    if (kind == Kind::None) return 0.0;
    double s2 = sigma * sigma;
    if (log_growth) s2 *= std::log(static_cast<double>(t));  // zero at t = 1
    return std::sqrt(s2);
  }

  double draw_unit(Rng& rng) const {
    switch (kind) {
      case Kind::None:
        return 0.0;
      case Kind::Gaussian:
        return rng.normal();
      case Kind::Laplace:
        return rng.laplace_unit();
      case Kind::StudentT:
        return rng.student_t_unit(df);
    }
    return 0.0;
  }
};

/// A ready-to-run experiment: drive + step + truncation, with the true root
/// exposed for the harness and the diagnostics.
struct ModelBundle {
  std::string name;
  DriveField drive;
  StepSchedule step;
  TruncationSchedule truncation;
  Vec z0_true;
  double x0 = 0.0;       // seed observation slot X_0
  double init_lo = -1.0;  // default draw interval for Z_0
  double init_hi = 1.0;
};

inline StepSchedule one_over_t_step() {
  return StepSchedule::make_scalar(
      [](long t, const Vec&, const History&) { return 1.0 / static_cast<double>(t); });
}

// ---------------------------------------------------------------------------
// Odd-power polynomial root finding: R(z) = -(z - z0)^l, additive noise,
// symmetric expanding truncation bounds.
// ---------------------------------------------------------------------------

struct PolySchedule {
  enum class Kind { Power, Log };
  Kind kind = Kind::Power;
  double c = 10.0;
  double delta = 0.05;  // Power only; requires 0 < delta < 1/(2l)
};

/// Checks the summability pair for the polynomial example with gamma_t = 1/t:
/// sum gamma_t = inf always holds; sum alpha_{t-1}^{2l} gamma_t^2 < inf needs
/// t^{2l(1/(2l)-delta) - 2} summable for the power bounds (any delta > 0) and
/// holds for any C with the logarithmic bounds.
inline void validate_polynomial_schedule(int l, const PolySchedule& sched) {
  if (l < 1 || l % 2 == 0)
    throw std::invalid_argument("polynomial model: l must be an odd integer >= 1");
  if (!(sched.c > 0.0) || !std::isfinite(sched.c))
    throw std::invalid_argument("polynomial model: schedule constant C must be > 0");
  if (sched.kind == PolySchedule::Kind::Power) {
    const double cap = 1.0 / (2.0 * l);
    if (!(sched.delta > 0.0) || sched.delta >= cap)
      throw std::invalid_argument(
          "polynomial model: delta must satisfy 0 < delta < 1/(2l); the growth-rate "
          "summability fails otherwise");
    // exponent of the squared-bound series: 2l(1/(2l)-delta) - 2 = -1 - 2l*delta < -1
  }
  // Log kind: alpha_t = C log t keeps both series conditions; the t = 1 bound
  // degenerates, which surfaces when the region is generated.
}

inline double odd_power(double d, int l) {
  double p = d;
  for (int i = 1; i < l; ++i) p *= d;
  return p;
}

inline ModelBundle make_polynomial_example(int l, double z0, NoiseSpec noise,
                                           PolySchedule sched) {
  validate_polynomial_schedule(l, sched);
  noise.validate();

  ModelBundle b;
  b.name = "poly";
  b.z0_true = {z0};
  b.init_lo = z0 - 2.0;
  b.init_hi = z0 + 2.0;

  DriveField f;
  f.dim = 1;
  f.stationary = (noise.kind == NoiseSpec::Kind::None) || !noise.log_growth;
  f.observe = [noise](long, const History&, Rng& rng) { return noise.draw_unit(rng); };
  f.regression = [l, z0](long, const Vec& z, const History&) {
    return Vec{-odd_power(z[0] - z0, l)};
  };
  f.noise = [noise](long t, const Vec&, const History& h) {
    return Vec{noise.sigma_at(t) * h.x(t)};
  };
  f.noise_second_moment = [noise](long t, const Vec&, const History&) {
    const double s = noise.sigma_at(t);
    return s * s;
  };
  f.second_moment = [l, z0, noise](long t, const Vec& z, const History&) {
    const double r = odd_power(z[0] - z0, l);
    const double s = noise.sigma_at(t);
    return r * r + s * s;
  };
  b.drive = std::move(f);

  b.step = one_over_t_step();
  if (sched.kind == PolySchedule::Kind::Power)
    b.truncation = expanding_interval_schedule(
        ExpandingKind::Power, {sched.c, static_cast<double>(l), sched.delta});
  else
    b.truncation = expanding_interval_schedule(ExpandingKind::Log, {sched.c});
  return b;
}

// ---------------------------------------------------------------------------
// Recursive likelihood-type estimation of the Gamma(theta, 1) shape from an
// i.i.d. stream, score step preconditioned by the Fisher information, with a
// lower bound shrinking to 0 and an upper bound growing linearly.
// ---------------------------------------------------------------------------

inline ModelBundle make_gamma_example(double theta, double c1, double c2) {
  (void)PositiveReal(theta);
  (void)PositiveReal(c1);
  (void)PositiveReal(c2);
  const double score_mean = digamma(theta);     // E log X
  const double score_var = trigamma(theta);     // Var log X

  ModelBundle b;
  b.name = "gamma";
  b.z0_true = {theta};
  b.init_lo = 0.5;
  b.init_hi = 5.0;

  DriveField f;
  f.dim = 1;
  f.stationary = true;
  f.observe = [theta](long, const History&, Rng& rng) { return rng.gamma_shape(theta); };
  // Literal estimator form; eval_psi derives eps = psi - r from it.
  f.psi = [](long t, const Vec& z, const History& h) {
    return Vec{(std::log(h.x(t)) - digamma(z[0])) / trigamma(z[0])};
  };
  f.regression = [score_mean](long, const Vec& z, const History&) {
    return Vec{(score_mean - digamma(z[0])) / trigamma(z[0])};
  };
  f.noise = [score_mean](long t, const Vec& z, const History& h) {
    return Vec{(std::log(h.x(t)) - score_mean) / trigamma(z[0])};
  };
  f.noise_second_moment = [score_var](long, const Vec& z, const History&) {
    const double i = trigamma(z[0]);
    return score_var / (i * i);
  };
  f.second_moment = [score_mean, score_var](long, const Vec& z, const History&) {
    const double i = trigamma(z[0]);
    const double bias = score_mean - digamma(z[0]);
    return (score_var + bias * bias) / (i * i);
  };
  b.drive = std::move(f);

  b.step = one_over_t_step();
  b.truncation = expanding_interval_schedule(ExpandingKind::LogSqrtInverse, {c1, c2});
  return b;
}

/// Variant without the upper truncation: U_t = [alpha_t, +inf). The growth
/// condition on the regression field fails on these sets; the monitors are
/// expected to flag it.
inline ModelBundle make_gamma_example_no_upper(double theta, double c1) {
  ModelBundle b = make_gamma_example(theta, c1, 1.0);
  b.name = "gamma_no_upper";
  b.truncation = expanding_interval_schedule(ExpandingKind::LogSqrtLowerOnly, {c1});
  return b;
}

// ---------------------------------------------------------------------------
// AR(1) recursive least squares: X_t = theta X_{t-1} + xi_t, untruncated,
// step size = inverse accumulated information.
// ---------------------------------------------------------------------------

inline ModelBundle make_ar1_example(double theta, double i0, double x0 = 0.0,
                                    NoiseSpec innovation = {}) {
  (void)PositiveReal(i0);
  if (!std::isfinite(theta)) throw std::invalid_argument("ar1 model: theta must be finite");
  if (!std::isfinite(x0)) throw std::invalid_argument("ar1 model: x0 must be finite");
  if (innovation.kind != NoiseSpec::Kind::None &&
      (innovation.sigma != 1.0 || innovation.log_growth))
    throw std::invalid_argument("ar1 model: innovations must have unit variance");
  innovation.validate();

  ModelBundle b;
  b.name = "ar1";
  b.z0_true = {theta};
  b.x0 = x0;
  b.init_lo = -2.0;
  b.init_hi = 2.0;

  DriveField f;
  f.dim = 1;
  f.stationary = false;
  f.observe = [theta, innovation](long t, const History& h, Rng& rng) {
    return theta * h.x(t - 1) + innovation.draw_unit(rng);
  };
  // Literal least-squares form: psi = X_{t-1} (X_t - z X_{t-1}).
  f.psi = [](long t, const Vec& z, const History& h) {
    const double xp = h.x(t - 1);
    return Vec{xp * (h.x(t) - z[0] * xp)};
  };
  f.regression = [theta](long t, const Vec& z, const History& h) {
    const double xp = h.x(t - 1);
    return Vec{xp * xp * (theta - z[0])};
  };
  f.noise = [theta](long t, const Vec&, const History& h) {
    const double xp = h.x(t - 1);
    return Vec{xp * (h.x(t) - theta * xp)};
  };
  f.noise_second_moment = [](long t, const Vec&, const History& h) {
    const double xp = h.x(t - 1);
    return xp * xp;  // unit innovation variance
  };
  f.second_moment = [theta](long t, const Vec& z, const History& h) {
    const double w = h.x(t - 1) * h.x(t - 1);
    const double d = theta - z[0];
    return w * w * d * d + w;
  };
  b.drive = std::move(f);

  // Accumulated information I_t = I_0 + sum_{s<=t} X_{s-1}^2, read as I_0 plus
  // the history's sequential prefix sum so that a plain accumulation loop
  // reproduces it bit for bit.
  b.step = StepSchedule::make_scalar([i0](long t, const Vec&, const History& h) {
    return 1.0 / (i0 + h.prefix_sum_sq(t - 1));
  });
  b.truncation = untruncated(1);
  return b;
}

}  // namespace truncsa

#endif  // TRUNCSA_MODELS_HPP
