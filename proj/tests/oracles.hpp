// Test-only oracles, kept independent of the library's production paths:
// series/shift evaluations for the special functions, brute-force nearest
// point search, and small statistics helpers.

#ifndef TRUNCSA_TESTS_ORACLES_HPP
#define TRUNCSA_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "truncsa/common.hpp"

namespace oracles {

/// Kahan-compensated sum of f(n) for n = n_hi down to n_lo (small terms
/// first).
template <typename F>
double kahan_sum_desc(long n_lo, long n_hi, F f) {
  double sum = 0.0, comp = 0.0;
  for (long n = n_hi; n >= n_lo; --n) {
    const double y = f(n) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

struct OracleValue {
  double value;
  double bound;  // rigorous absolute error bound
};

/// Trigamma from its defining series 1/x^2 + sum_{n>=1} 1/(x+n)^2, summed to
/// N terms with an integral-comparison tail. The tail lies in
/// [1/(x+N+1), 1/(x+N)]; the midpoint-rule refinement 1/(x+N+1/2) is used as
/// the estimate, and the bracket half-width as the reported (very
/// conservative) bound.
inline OracleValue trigamma_series(double x, long n_terms) {
  if (!(x > 0.0)) throw std::domain_error("trigamma_series: x must be > 0");
  const double partial =
      kahan_sum_desc(1, n_terms, [x](long n) { return 1.0 / ((x + n) * (x + n)); });
  const double tail_mid = 1.0 / (x + static_cast<double>(n_terms) + 0.5);
  const double bracket_lo = 1.0 / (x + static_cast<double>(n_terms) + 1.0);
  const double bracket_hi = 1.0 / (x + static_cast<double>(n_terms));
  return {1.0 / (x * x) + partial + tail_mid, 0.5 * (bracket_hi - bracket_lo)};
}

/// Digamma via a long upward shift: psi(x) = psi(x+N) - sum_{k<N} 1/(x+k),
/// where psi at the huge argument needs only the first three expansion terms
/// (truncation error below 1/(120 (x+N)^4)).
inline OracleValue digamma_shift(double x, long n_shift) {
  if (!(x > 0.0)) throw std::domain_error("digamma_shift: x must be > 0");
  const double y = x + static_cast<double>(n_shift);
  const double head = std::log(y) - 0.5 / y - 1.0 / (12.0 * y * y);
  const double sum = kahan_sum_desc(0, n_shift - 1, [x](long k) { return 1.0 / (x + k); });
  return {head - sum, 1.0 / (120.0 * y * y * y * y)};
}

/// Brute-force nearest point of an axis-aligned box on a fine grid.
inline truncsa::Vec box_nearest_grid(const truncsa::Vec& lo, const truncsa::Vec& hi,
                                     const truncsa::Vec& x, long pts_per_dim) {
  const std::size_t d = lo.size();
  std::vector<long> idx(d, 0);
  truncsa::Vec best;
  double best_d = std::numeric_limits<double>::infinity();
  truncsa::Vec y(d);
  for (;;) {
    for (std::size_t i = 0; i < d; ++i)
      y[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) /
                         static_cast<double>(pts_per_dim - 1);
    const double dist = truncsa::norm2(truncsa::sub(x, y));
    if (dist < best_d) {
      best_d = dist;
      best = y;
    }
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < pts_per_dim) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
  return best;
}

/// Central finite difference of a scalar function, componentwise.
template <typename F>
truncsa::Vec central_gradient(F f, const truncsa::Vec& u, double h) {
  truncsa::Vec g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    truncsa::Vec up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    g[i] = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

struct SampleStats {
  double mean = 0.0;
  double var = 0.0;     // unbiased
  double se_mean = 0.0;
  double se_var = 0.0;  // large-sample SE of the sample variance
  long n = 0;
};

/// One-pass moments with the standard errors used by the 4-sigma checks.
inline SampleStats stats(const std::vector<double>& xs) {
  SampleStats s;
  s.n = static_cast<long>(xs.size());
  if (s.n < 2) throw std::invalid_argument("stats: need n >= 2");
  double mean = 0.0, m2 = 0.0;
  long k = 0;
  for (double v : xs) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  s.mean = mean;
  s.var = m2 / static_cast<double>(s.n - 1);
  double m4 = 0.0;
  for (double v : xs) {
    const double d = v - mean;
    m4 += d * d * d * d;
  }
  m4 /= static_cast<double>(s.n);
  s.se_mean = std::sqrt(s.var / static_cast<double>(s.n));
  const double var_of_var = (m4 - s.var * s.var) / static_cast<double>(s.n);
  s.se_var = std::sqrt(std::max(var_of_var, 0.0));
  return s;
}

}  // namespace oracles

#endif  // TRUNCSA_TESTS_ORACLES_HPP
