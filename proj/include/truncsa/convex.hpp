#ifndef TRUNCSA_CONVEX_HPP
#define TRUNCSA_CONVEX_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "truncsa/common.hpp"
#include "truncsa/history.hpp"

namespace truncsa {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed convex region with exact nearest-point projection. The closed
/// algebra {full space, interval, box, ball} covers every truncation set the
/// built-in models use, and keeps projection in closed form: clamping for
/// intervals and boxes, radial scaling for balls.
///
/// Degenerate parameters (lo > hi, radius <= 0, NaN) are rejected at
/// construction, so a region is nonempty by construction.
class ConvexRegion {
 public:
  enum class Kind { FullSpace, Interval, Box, Ball };

  static ConvexRegion full_space(int dim) {
    if (dim < 1) throw std::invalid_argument("ConvexRegion: dimension must be >= 1");
    ConvexRegion r;
    r.kind_ = Kind::FullSpace;
    r.dim_ = dim;
    return r;
  }

  /// 1-d closed interval with extended-real endpoints; [-inf, inf] is the
  /// untruncated line.
  static ConvexRegion interval(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi || lo == kInf || hi == -kInf)
      throw std::invalid_argument("ConvexRegion::interval: need lo <= hi, lo < +inf, hi > -inf");
    ConvexRegion r;
    r.kind_ = Kind::Interval;
    r.dim_ = 1;
    r.lo_ = {lo};
    r.hi_ = {hi};
    return r;
  }

  static ConvexRegion box(Vec lo, Vec hi) {
    if (lo.empty() || lo.size() != hi.size())
      throw std::invalid_argument("ConvexRegion::box: bounds must be nonempty, equal size");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i] || lo[i] == kInf ||
          hi[i] == -kInf)
        throw std::invalid_argument("ConvexRegion::box: need lo_i <= hi_i componentwise");
    }
    ConvexRegion r;
    r.kind_ = Kind::Box;
    r.dim_ = static_cast<int>(lo.size());
    r.lo_ = std::move(lo);
    r.hi_ = std::move(hi);
    return r;
  }

  static ConvexRegion ball(Vec center, double radius) {
    if (center.empty() || !all_finite(center))
      throw std::invalid_argument("ConvexRegion::ball: center must be finite, nonempty");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("ConvexRegion::ball: radius must be finite and > 0");
    ConvexRegion r;
    r.kind_ = Kind::Ball;
    r.dim_ = static_cast<int>(center.size());
    r.lo_ = std::move(center);
    r.radius_ = radius;
    return r;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  bool contains(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case Kind::FullSpace:
        return true;
      case Kind::Interval:
      case Kind::Box:
        for (std::size_t i = 0; i < x.size(); ++i)
          if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
        return true;
      case Kind::Ball: {
        // Small shell keeps contains() and project() consistent at the
        // boundary; sized by center + radius because the componentwise
        // rounding of c + t scales with the center's magnitude.
        const double d = norm2(sub(x, lo_));
        const double tol =
            16.0 * std::numeric_limits<double>::epsilon() * (radius_ + norm2(lo_));
        return d <= radius_ + tol;
      }
    }
    return false;
  }

  /// Nearest point of the region; returns x itself whenever contains(x).
  Vec project(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case Kind::FullSpace:
        return x;
      case Kind::Interval:
      case Kind::Box: {
        Vec y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::min(std::max(x[i], lo_[i]), hi_[i]);
        return y;
      }
      case Kind::Ball: {
        if (contains(x)) return x;
        const Vec d = sub(x, lo_);
        return add(lo_, scale(radius_ / norm2(d), d));
      }
    }
    return x;
  }

  /// Per-coordinate extent (possibly infinite); grid monitors intersect this
  /// with their window.
  double lower_bound(int i) const {
    switch (kind_) {
      case Kind::FullSpace:
        return -kInf;
      case Kind::Interval:
      case Kind::Box:
        return lo_[static_cast<std::size_t>(i)];
      case Kind::Ball:
        return lo_[static_cast<std::size_t>(i)] - radius_;
    }
    return -kInf;
  }

  double upper_bound(int i) const {
    switch (kind_) {
      case Kind::FullSpace:
        return kInf;
      case Kind::Interval:
      case Kind::Box:
        return hi_[static_cast<std::size_t>(i)];
      case Kind::Ball:
        return lo_[static_cast<std::size_t>(i)] + radius_;
    }
    return kInf;
  }

  bool bounded() const {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(lower_bound(i)) || !std::isfinite(upper_bound(i))) return false;
    return true;
  }

 private:
  void check_dim(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("ConvexRegion: point dimension " + std::to_string(x.size()) +
                                  " does not match region dimension " + std::to_string(dim_));
  }

  Kind kind_ = Kind::FullSpace;
  int dim_ = 1;
  Vec lo_, hi_;       // interval/box bounds; ball center lives in lo_
  double radius_ = 0;
};

/// The truncation operator.
inline Vec project(const ConvexRegion& region, const Vec& x) { return region.project(x); }

/// Time-indexed family of truncation regions. The generator must be a pure
/// function of (t, history); that is the runtime stand-in for measurability
/// of the truncation, and the shared-across-workers contract.
struct TruncationSchedule {
  std::function<ConvexRegion(long t, const History&)> generator;
  std::string description;
};

inline TruncationSchedule untruncated(int dim) {
  return {[dim](long, const History&) { return ConvexRegion::full_space(dim); }, "untruncated"};
}

enum class ExpandingKind {
  Power,              // [-C t^{1/(2l) - delta}, +C t^{1/(2l) - delta}]
  Log,                // [-C log t, +C log t]
  Linear,             // [-C t, +C t]
  LogSqrtInverse,     // [C1 (log(t+2))^{-1/2}, C2 (t+2)]
  LogSqrtLowerOnly,   // [C1 (log(t+2))^{-1/2}, +inf) — no upper truncation
};

/// Interval schedules given by closed-form endpoint sequences. Constants are
/// validated eagerly; bound positivity is checked when a region is generated,
/// so a schedule whose first bound degenerates (e.g. C log t at t = 1) is
/// constructible but fails at use.
inline TruncationSchedule expanding_interval_schedule(ExpandingKind kind,
                                                      const std::vector<double>& params) {
  auto need = [&](std::size_t n, const char* what) {
    if (params.size() != n)
      throw std::invalid_argument(std::string("expanding_interval_schedule: ") + what);
  };
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("expanding_interval_schedule: ") + what);
  };
  auto symmetric = [](double half_width, long t) {
    if (!(half_width > 0.0))
      throw std::invalid_argument("expanding_interval_schedule: degenerate bound at t = " +
                                  std::to_string(t));
    return ConvexRegion::interval(-half_width, half_width);
  };

  switch (kind) {
    case ExpandingKind::Power: {
      need(3, "power kind takes {C, l, delta}");
      const double c = params[0];
      const double l = params[1];
      const double delta = params[2];
      positive(c, "C must be > 0");
      if (!(l >= 1.0) || l != std::floor(l) || std::fmod(l, 2.0) != 1.0)
        throw std::invalid_argument("expanding_interval_schedule: l must be an odd integer >= 1");
      const double cap = 1.0 / (2.0 * l);
      if (!(delta > 0.0) || delta >= cap)
        throw std::invalid_argument(
            "expanding_interval_schedule: delta must satisfy 0 < delta < 1/(2l)");
      const double expo = cap - delta;
      return {[c, expo, symmetric](long t, const History&) {
                return symmetric(c * std::pow(static_cast<double>(t), expo), t);
              },
              "interval [-C t^(1/(2l)-delta), +C t^(1/(2l)-delta)]"};
    }
    case ExpandingKind::Log: {
      need(1, "log kind takes {C}");
      const double c = params[0];
      positive(c, "C must be > 0");
      return {[c, symmetric](long t, const History&) {
                return symmetric(c * std::log(static_cast<double>(t)), t);
              },
              "interval [-C log t, +C log t]"};
    }
    case ExpandingKind::Linear: {
      need(1, "linear kind takes {C}");
      const double c = params[0];
      positive(c, "C must be > 0");
      return {[c, symmetric](long t, const History&) {
                return symmetric(c * static_cast<double>(t), t);
              },
              "interval [-C t, +C t]"};
    }
    case ExpandingKind::LogSqrtInverse: {
      need(2, "log_sqrt_inverse kind takes {C1, C2}");
      const double c1 = params[0];
      const double c2 = params[1];
      positive(c1, "C1 must be > 0");
      positive(c2, "C2 must be > 0");
      if (!(c1 / std::sqrt(std::log(3.0)) < 3.0 * c2))
        throw std::invalid_argument(
            "expanding_interval_schedule: lower bound exceeds upper bound at t = 1");
      return {[c1, c2](long t, const History&) {
                const double lo = c1 / std::sqrt(std::log(static_cast<double>(t) + 2.0));
                const double hi = c2 * (static_cast<double>(t) + 2.0);
                return ConvexRegion::interval(lo, hi);
              },
              "interval [C1 (log(t+2))^(-1/2), C2 (t+2)]"};
    }
    case ExpandingKind::LogSqrtLowerOnly: {
      need(1, "log_sqrt_lower_only kind takes {C1}");
      const double c1 = params[0];
      positive(c1, "C1 must be > 0");
      return {[c1](long t, const History&) {
                const double lo = c1 / std::sqrt(std::log(static_cast<double>(t) + 2.0));
                return ConvexRegion::interval(lo, kInf);
              },
              "interval [C1 (log(t+2))^(-1/2), +inf)"};
    }
  }
  throw std::invalid_argument("expanding_interval_schedule: unknown kind");
}

/// Shrinking bounds around an auxiliary estimator: U_t is the box
/// aux(history) +/- delta(t) in every coordinate.
inline TruncationSchedule auxiliary_shrinking_schedule(
    std::function<Vec(const History&)> aux, std::function<double(long)> delta) {
  if (!aux || !delta)
    throw std::invalid_argument("auxiliary_shrinking_schedule: aux and delta are required");
  return {[aux, delta](long t, const History& h) {
            const double d = delta(t);
            if (!(d > 0.0) || !std::isfinite(d))
              throw std::invalid_argument(
                  "auxiliary_shrinking_schedule: delta must be > 0 (t = " + std::to_string(t) +
                  ")");
            const Vec center = aux(h);
            Vec lo(center.size()), hi(center.size());
            for (std::size_t i = 0; i < center.size(); ++i) {
              lo[i] = center[i] - d;
              hi[i] = center[i] + d;
            }
            return ConvexRegion::box(std::move(lo), std::move(hi));
          },
          "box aux(history) +/- delta(t)"};
}

}  // namespace truncsa

#endif  // TRUNCSA_CONVEX_HPP
