#ifndef TRUNCSA_SPECFUN_HPP
#define TRUNCSA_SPECFUN_HPP

#include <cmath>
#include <stdexcept>

namespace truncsa {

/// Strictly positive, finite real. The validated carrier for arguments and
/// parameters that live on (0, inf): Gamma shapes, radii, rates.
class PositiveReal {
 public:
  explicit PositiveReal(double v) : value_(v) {
    if (!(std::isfinite(v) && v > 0.0))
      throw std::domain_error("PositiveReal: value must be finite and > 0");
  }
  double value() const { return value_; }

 private:
  double value_;
};

namespace detail {

inline void check_specfun_domain(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error(std::string(name) + ": argument must be finite and > 0");
}

}  // namespace detail

/// First logarithmic derivative of the Gamma function on (0, inf).
/// Upward recurrence to x >= 10, then the Bernoulli asymptotic series;
/// relative error well below 1e-12 over the whole domain.
inline double digamma(double x) {
  detail::check_specfun_domain(x, "digamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double z = 1.0 / (x * x);
  const double tail =
      z * (1.0 / 12 +
           z * (-1.0 / 120 +
                z * (1.0 / 252 +
                     z * (-1.0 / 240 +
                          z * (1.0 / 132 + z * (-691.0 / 32760 + z * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 / x - tail;
}

/// Second logarithmic derivative of the Gamma function on (0, inf).
/// Same scheme as digamma; strictly positive and decreasing.
inline double trigamma(double x) {
  detail::check_specfun_domain(x, "trigamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double z = 1.0 / (x * x);
  const double series =
      1.0 / 6 +
      z * (-1.0 / 30 +
           z * (1.0 / 42 +
                z * (-1.0 / 30 + z * (5.0 / 66 + z * (-691.0 / 2730 + z * (7.0 / 6))))));
  return acc + 1.0 / x + 0.5 * z + z / x * series;
}

inline double digamma(PositiveReal x) { return digamma(x.value()); }
inline double trigamma(PositiveReal x) { return trigamma(x.value()); }

}  // namespace truncsa

#endif  // TRUNCSA_SPECFUN_HPP
