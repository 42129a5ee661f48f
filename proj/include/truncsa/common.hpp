#ifndef TRUNCSA_COMMON_HPP
#define TRUNCSA_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace truncsa {

using Vec = std::vector<double>;

/// Dense row-major matrix, only as big as a step-size matrix needs to be.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {
    if (r <= 0 || c <= 0) throw std::invalid_argument("Mat: dimensions must be positive");
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  static Mat diagonal(const Vec& d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
  }

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  Vec apply(const Vec& x) const {
    if (static_cast<int>(x.size()) != cols)
      throw std::invalid_argument("Mat::apply: dimension mismatch");
    Vec y(static_cast<std::size_t>(rows), 0.0);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += at(i, j) * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = s;
    }
    return y;
  }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(double c, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// A trajectory aborted mid-run. Carries the failing step index and the
/// iterate at which the failure surfaced.
struct TrajectoryError : std::runtime_error {
  long t;
  Vec z;
  TrajectoryError(long t_, Vec z_, const std::string& reason)
      : std::runtime_error("step " + std::to_string(t_) + ": " + reason),
        t(t_),
        z(std::move(z_)) {}
};

}  // namespace truncsa

#endif  // TRUNCSA_COMMON_HPP
