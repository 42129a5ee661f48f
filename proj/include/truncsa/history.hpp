#ifndef TRUNCSA_HISTORY_HPP
#define TRUNCSA_HISTORY_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace truncsa {

/// Append-only record of scalar observations X_0, X_1, ..., owned by the
/// engine and handed read-only to fields and schedules. Predictability is a
/// contract on the readers: a quantity indexed by t may touch slots <= t-1
/// only, never the newest observation it will be combined with.
///
/// Prefix sums are maintained on append so running means and accumulated
/// information are O(1). cum/cumsq use left-to-right float association,
/// matching a plain sequential accumulation loop bit for bit.
class History {
 public:
  explicit History(double x0 = 0.0) { append(x0); }

  long last_index() const { return static_cast<long>(xs_.size()) - 1; }

  double x(long s) const {
    check(s);
    return xs_[static_cast<std::size_t>(s)];
  }

  void append(double v) {
    xs_.push_back(v);
    cum_.push_back((cum_.empty() ? 0.0 : cum_.back()) + v);
    cumsq_.push_back((cumsq_.empty() ? 0.0 : cumsq_.back()) + v * v);
  }

  /// Overwrite the newest slot; used by conditional redraws on scratch copies.
  void set_last(double v) {
    const std::size_t n = xs_.size();
    xs_[n - 1] = v;
    cum_[n - 1] = (n >= 2 ? cum_[n - 2] : 0.0) + v;
    cumsq_[n - 1] = (n >= 2 ? cumsq_[n - 2] : 0.0) + v * v;
  }

  /// X_0 + ... + X_s.
  double prefix_sum(long s) const {
    check(s);
    return cum_[static_cast<std::size_t>(s)];
  }

  /// X_0^2 + ... + X_s^2.
  double prefix_sum_sq(long s) const {
    check(s);
    return cumsq_[static_cast<std::size_t>(s)];
  }

  /// Mean of the proper observations X_1..X_s (excludes the seed slot X_0).
  double mean_through(long s) const {
    check(s);
    if (s < 1) throw std::invalid_argument("History::mean_through: s >= 1 required");
    return (cum_[static_cast<std::size_t>(s)] - cum_[0]) / static_cast<double>(s);
  }

 private:
  void check(long s) const {
    if (s < 0 || s > last_index())
      throw std::out_of_range("History: index " + std::to_string(s) + " out of range");
  }

  std::vector<double> xs_, cum_, cumsq_;
};

}  // namespace truncsa

#endif  // TRUNCSA_HISTORY_HPP
