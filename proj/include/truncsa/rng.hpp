#ifndef TRUNCSA_RNG_HPP
#define TRUNCSA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace truncsa {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for replication k of an experiment seeded with `base`.
/// The rule is fixed so results reproduce across machines:
///   seed_k = mix64(base + (k + 1) * 0x9E3779B97F4A7C15).
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t k) {
  return mix64(base + (k + 1) * 0x9E3779B97F4A7C15ull);
}

/// Derived stream for auxiliary draws (initial points, monitor resampling)
/// that must not perturb the trajectory stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

/// mt19937_64 core with explicit samplers. All randomness in the project
/// flows through this class: std::* distributions are implementation-defined,
/// and trajectories must be bit-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform01() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal, Marsaglia polar method. The spare deviate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Laplace scaled to unit variance (scale b = 1/sqrt(2)).
  double laplace_unit() {
    const double u = uniform01() - 0.5;
    const double b = 0.70710678118654752;
    return (u < 0.0 ? b : -b) * std::log1p(-2.0 * std::fabs(u));
  }

  /// Student-t with df > 2, scaled to unit variance.
  double student_t_unit(double df) {
    if (!(df > 2.0)) throw std::domain_error("student_t_unit: df must be > 2");
    const double z = normal();
    const double w = 2.0 * gamma_shape(df / 2.0);  // chi-square(df)
    const double t = z / std::sqrt(w / df);
    return t * std::sqrt((df - 2.0) / df);
  }

  /// Gamma(shape, 1) via the Marsaglia-Tsang squeeze, with the usual
  /// power-of-uniform boost below shape 1.
  double gamma_shape(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("gamma_shape: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma_shape(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace truncsa

#endif  // TRUNCSA_RNG_HPP
