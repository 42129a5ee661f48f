#ifndef TRUNCSA_DIAGNOSTICS_HPP
#define TRUNCSA_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "truncsa/engine.hpp"
#include "truncsa/models.hpp"

namespace truncsa {

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

/// Nonnegative potential of the deviation, with gradient and a global bound
/// on the Hessian norm; the default is the squared Euclidean norm.
struct LyapunovV {
  std::function<double(const Vec&)> v;
  std::function<Vec(const Vec&)> grad;
  double hessian_sup = 0.0;

  static LyapunovV quadratic() {
    LyapunovV l;
    l.v = [](const Vec& u) { return dot(u, u); };
    l.grad = [](const Vec& u) { return scale(2.0, u); };
    l.hessian_sup = 2.0;
    return l;
  }
};

struct DriftOptions {
  long mc_n = 0;
  Rng* rng = nullptr;
};

/// The per-step drift functional at deviation u: an upper bound on the
/// conditional one-step change of V,
///   V'(u) gamma_t(z0+u) R_t(z0+u)
///     + (1/2) sup|V''| E{ |gamma_t(z0+u) Psi_t(z0+u)|^2 | F_{t-1} }.
/// With a scalar step and the default quadratic V this reduces to
///   2 u^T gamma R + gamma^2 E{|Psi|^2}.
/// The second moment comes from the drive's analytic form when present, else
/// from Monte Carlo redraws (required for matrix steps).
inline double drift_functional(const Vec& u, long t, const History& h, const DriveField& drive,
                               const StepSchedule& step, const LyapunovV& lyap, const Vec& z0,
                               DriftOptions opt = {}) {
  const Vec z = add(z0, u);
  const Vec g = lyap.grad(u);
  const Vec r = drive.regression(t, z, h);

  if (step.kind == StepSchedule::Kind::Scalar) {
    const double gamma = step.scalar_at(t, z, h);
    double m2;
    if (drive.second_moment) {
      m2 = drive.second_moment(t, z, h);
    } else if (opt.mc_n > 0 && opt.rng) {
      m2 = second_moment_estimate(drive, t, z, h, opt.mc_n, *opt.rng).mean;
    } else {
      throw std::invalid_argument(
          "drift_functional: no second moment available (analytic missing, Monte Carlo "
          "disabled)");
    }
    return gamma * dot(g, r) + 0.5 * lyap.hessian_sup * gamma * gamma * m2;
  }

  const Mat m = step.matrix(t, z, h);
  if (!(opt.mc_n > 0 && opt.rng))
    throw std::invalid_argument("drift_functional: matrix steps need Monte Carlo redraws");
  if (!drive.observe)
    throw std::invalid_argument("drift_functional: drive has no observation sampler");
  const long last = h.last_index();
  if (t != last && t != last + 1)
    throw std::invalid_argument("drift_functional: t must address the newest observation");
  History scratch = h;
  if (t == last + 1) scratch.append(0.0);
  double mean = 0.0;
  for (long k = 0; k < opt.mc_n; ++k) {
    scratch.set_last(drive.observe(t, scratch, *opt.rng));
    const PsiParts p = eval_psi(drive, t, z, scratch);
    const Vec gp = m.apply(p.psi);
    mean += (dot(gp, gp) - mean) / static_cast<double>(k + 1);
  }
  return dot(g, m.apply(r)) + 0.5 * lyap.hessian_sup * mean;
}

struct DiagnosticsConfig {
  bool pathwise = true;
  bool uniform = true;
  long grid = 2048;        // points per dimension
  double window = 50.0;    // grid half-width around z0
  std::vector<double> epsilons = {0.3, 0.1, 0.03};
  long mc_n = 1024;        // redraws when no analytic second moment
  double tail_summable = 1e-3;   // last-decade increment fraction below => summable-looking
  double tail_diverging = 1e-2;  // last-decade increment fraction above => diverging
  double v_osc_tol = 1e-2;
  std::uint64_t mc_seed = 0x7460BEEF;
};

struct SeriesReport {
  std::string name;
  double total = 0.0;
  double tail_increment = 0.0;
  double tail_fraction = 0.0;
  std::string verdict;
  std::vector<std::pair<long, double>> marks;  // partial sums at decades and the horizon
};

struct EpsilonSeries {
  double epsilon = 0.0;
  SeriesReport pull_step_sum;       // sum over t of inf{-(z-z0)^T R_t} gamma_t
  SeriesReport neg_drift_floor_sum; // sum over t of inf [drift]^-
  long empty_sets = 0;              // steps where the annulus misses U_{t-1}
};

struct PathwiseReport {
  SeriesReport pos_drift;  // sum of [drift]^+/(1+V), the almost-supermartingale perturbation
  SeriesReport neg_drift;  // sum of [drift]^-
  double v_initial = 0.0;
  double v_final = 0.0;
  double v_tail_max = 0.0;
  double v_tail_min = 0.0;
  double v_tail_mean = 0.0;
  bool v_converged = false;
};

struct UniformReport {
  SeriesReport sup_drift_step;        // sum q_t gamma_t
  SeriesReport sup_regression_step2;  // sum r_t gamma_t^2
  SeriesReport sup_noise_step2;       // sum e_t gamma_t^2
  double last_sup_drift = 0.0;        // q_t at the final step
  double last_sup_regression = 0.0;   // r_t at the final step
  double last_sup_noise = 0.0;        // e_t at the final step
  std::vector<EpsilonSeries> per_epsilon;
  long sign_violations = 0;   // grid points with (z-z0)^T R_t(z) > 0
  long empty_mask_steps = 0;  // steps with no grid point inside U_{t-1}
  bool region_unbounded_seen = false;
  long window_edge_hits = 0;  // sup attained on the window edge while the region extends past it
};

struct ConditionReport {
  long horizon = 0;
  Vec z0;
  DiagnosticsConfig params;
  bool has_pathwise = false;
  bool has_uniform = false;
  PathwiseReport pathwise;
  UniformReport uniform;
};

/// Online fold over a trajectory computing the convergence-condition series.
/// Attach on_step as (or inside) the engine observer; every step of the run
/// must pass through it, in order. Uses its own generator for any Monte Carlo
/// so the monitored trajectory is unchanged by monitoring.
class DiagnosticsCollector {
 public:
  DiagnosticsCollector(const DriveField& drive, const StepSchedule& step, Vec z0,
                       LyapunovV lyap, DiagnosticsConfig cfg, long horizon)
      : drive_(drive),
        step_(step),
        z0_(std::move(z0)),
        lyap_(std::move(lyap)),
        cfg_(std::move(cfg)),
        horizon_(horizon),
        mc_rng_(derive_seed(cfg_.mc_seed, 0x6d6f6e69)) {
    if (z0_.empty()) throw std::invalid_argument("diagnostics: missing z0");
    if (horizon_ < 1) throw std::invalid_argument("diagnostics: horizon must be >= 1");
    for (double eps : cfg_.epsilons)
      if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("diagnostics: annulus epsilons must lie in (0, 1)");
    dim_ = static_cast<int>(z0_.size());
    if (cfg_.uniform) {
      if (dim_ > 3)
        throw std::invalid_argument("diagnostics: grid monitors refuse dimension > 3");
      if (cfg_.grid < 2)
        throw std::invalid_argument("diagnostics: grid needs >= 2 points per dimension");
      if (step_.kind != StepSchedule::Kind::Scalar)
        throw std::invalid_argument("diagnostics: grid monitors assume a scalar step schedule");
      double total = 1.0;
      for (int d = 0; d < dim_; ++d) total *= static_cast<double>(cfg_.grid);
      if (total > 4.2e6)
        throw std::invalid_argument(
            "diagnostics: grid too large for this dimension; reduce diagnostics.grid");
      build_axes();
    }
    tail_start_ = std::max<long>(1, horizon_ / 10);
    for (long m = 1; m < horizon_; m *= 10) marks_.push_back(m);
    marks_.push_back(horizon_);

    pos_drift_.name = "pos_drift_norm";
    neg_drift_.name = "neg_drift";
    c1_.name = "sup_drift_step";
    r2_.name = "sup_regression_step2";
    e2_.name = "sup_noise_step2";
    for (double eps : cfg_.epsilons) {
      EpsState e;
      e.epsilon = eps;
      e.pull.name = "pull_step_sum";
      e.floor.name = "neg_drift_floor_sum";
      per_eps_.push_back(std::move(e));
    }
    registry_ = {&pos_drift_, &neg_drift_, &c1_, &r2_, &e2_};
    for (auto& e : per_eps_) {
      registry_.push_back(&e.pull);
      registry_.push_back(&e.floor);
    }
  }

  void on_step(const StepOutcome& o) {
    const long t = o.t;
    last_row_.clear();

    if (cfg_.pathwise) {
      const Vec u_prev = sub(*o.z_prev, z0_);
      const double vprev = lyap_.v(u_prev);
      if (t == 1) v_initial_ = vprev;
      DriftOptions opt{cfg_.mc_n, &mc_rng_};
      const double nt =
          drift_functional(u_prev, t, *o.history, drive_, step_, lyap_, z0_, opt);
      const double bt = pos_part(nt) / (1.0 + vprev);
      pos_drift_.sum += bt;
      neg_drift_.sum += neg_part(nt);
      const double vcur = lyap_.v(sub(*o.z_post, z0_));
      v_final_ = vcur;
      if (t > tail_start_) {
        v_tail_max_ = std::max(v_tail_max_, vcur);
        v_tail_min_ = std::min(v_tail_min_, vcur);
        v_tail_sum_ += vcur;
        ++v_tail_n_;
      }
      last_row_.push_back(nt);
      last_row_.push_back(bt);
      last_row_.push_back(vcur);
    }

    if (cfg_.uniform) {
      // The sups/infs range over U_{t-1}; U_0 is taken to be U_1 so the first
      // scan stays inside the model's domain.
      const ConvexRegion& scan_region = prev_region_ ? *prev_region_ : *o.region;
      const double gamma = step_.scalar_at(t, *o.z_prev, *o.history);
      StepScan s = (dim_ == 1) ? scan_dim1(t, gamma, scan_region, *o.history)
                               : scan_general(t, gamma, scan_region, *o.history);
      c1_.sum += s.q * gamma;
      r2_.sum += s.r * gamma * gamma;
      e2_.sum += s.e * gamma * gamma;
      last_q_ = s.q;
      last_r_ = s.r;
      last_e_ = s.e;
      sign_violations_ += s.sign_violations;
      if (s.empty_mask) ++empty_mask_steps_;
      if (!scan_region.bounded()) region_unbounded_seen_ = true;
      window_edge_hits_ += s.edge_hits;
      last_row_.push_back(s.q);
      last_row_.push_back(s.r);
      last_row_.push_back(s.e);
      for (std::size_t i = 0; i < per_eps_.size(); ++i) {
        per_eps_[i].pull.sum += s.nu[i] * gamma;
        per_eps_[i].floor.sum += s.neg_floor[i];
        if (s.eps_empty[i]) ++per_eps_[i].empty_sets;
        last_row_.push_back(s.nu[i]);
        last_row_.push_back(s.neg_floor[i]);
      }
      last_row_.push_back(s.sign_violations == 0 ? 1.0 : 0.0);
      prev_region_ = *o.region;
    }

    if (t == tail_start_)
      for (Series* s : registry_) s->at_tail = s->sum;
    if (mark_idx_ < marks_.size() && t == marks_[mark_idx_]) {
      for (Series* s : registry_) s->marks.emplace_back(t, s->sum);
      ++mark_idx_;
    }
  }

  /// Column names for the per-step monitor CSV, matching last_row().
  std::vector<std::string> columns() const {
    std::vector<std::string> c;
    if (cfg_.pathwise) {
      c.insert(c.end(), {"diag_drift", "diag_pos_drift_norm", "diag_v"});
    }
    if (cfg_.uniform) {
      c.insert(c.end(), {"diag_sup_drift", "diag_sup_regression", "diag_sup_noise"});
      for (double eps : cfg_.epsilons) {
        c.push_back("diag_pull_eps" + format_eps(eps));
        c.push_back("diag_neg_floor_eps" + format_eps(eps));
      }
      c.push_back("diag_sign_ok");
    }
    return c;
  }

  const std::vector<double>& last_row() const { return last_row_; }

  ConditionReport report() const {
    ConditionReport rep;
    rep.horizon = horizon_;
    rep.z0 = z0_;
    rep.params = cfg_;
    rep.has_pathwise = cfg_.pathwise;
    rep.has_uniform = cfg_.uniform;
    if (cfg_.pathwise) {
      rep.pathwise.pos_drift = finish(pos_drift_);
      rep.pathwise.neg_drift = finish(neg_drift_);
      rep.pathwise.v_initial = v_initial_;
      rep.pathwise.v_final = v_final_;
      rep.pathwise.v_tail_max = (v_tail_n_ ? v_tail_max_ : v_final_);
      rep.pathwise.v_tail_min = (v_tail_n_ ? v_tail_min_ : v_final_);
      rep.pathwise.v_tail_mean = (v_tail_n_ ? v_tail_sum_ / static_cast<double>(v_tail_n_) : v_final_);
      rep.pathwise.v_converged =
          (rep.pathwise.v_tail_max - rep.pathwise.v_tail_min) <=
          cfg_.v_osc_tol * (1.0 + rep.pathwise.v_tail_mean);
    }
    if (cfg_.uniform) {
      rep.uniform.sup_drift_step = finish(c1_);
      rep.uniform.sup_regression_step2 = finish(r2_);
      rep.uniform.sup_noise_step2 = finish(e2_);
      rep.uniform.last_sup_drift = last_q_;
      rep.uniform.last_sup_regression = last_r_;
      rep.uniform.last_sup_noise = last_e_;
      for (const auto& e : per_eps_) {
        EpsilonSeries es;
        es.epsilon = e.epsilon;
        es.pull_step_sum = finish(e.pull);
        es.neg_drift_floor_sum = finish(e.floor);
        es.empty_sets = e.empty_sets;
        rep.uniform.per_epsilon.push_back(std::move(es));
      }
      rep.uniform.sign_violations = sign_violations_;
      rep.uniform.empty_mask_steps = empty_mask_steps_;
      rep.uniform.region_unbounded_seen = region_unbounded_seen_;
      rep.uniform.window_edge_hits = window_edge_hits_;
    }
    return rep;
  }

 private:
  struct Series {
    std::string name;
    double sum = 0.0;
    double at_tail = 0.0;
    std::vector<std::pair<long, double>> marks;
  };

  struct EpsState {
    double epsilon;
    Series pull;
    Series floor;
    long empty_sets = 0;
  };

  struct StepScan {
    double q = 0.0, r = 0.0, e = 0.0;
    std::vector<double> nu, neg_floor;
    std::vector<char> eps_empty;
    long sign_violations = 0;
    bool empty_mask = false;
    long edge_hits = 0;
  };

  static std::string format_eps(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", eps);
    return buf;
  }

  SeriesReport finish(const Series& s) const {
    SeriesReport r;
    r.name = s.name;
    r.total = s.sum;
    r.tail_increment = s.sum - s.at_tail;
    r.tail_fraction = (s.sum != 0.0) ? r.tail_increment / s.sum : 0.0;
    // Thresholds act on 1 + total: relative for sums of order one and above,
    // an absolute cutoff for series that never accumulated anything.
    const double scale = 1.0 + s.sum;
    if (r.tail_increment <= cfg_.tail_summable * scale)
      r.verdict = "summable-looking";
    else if (r.tail_increment >= cfg_.tail_diverging * scale)
      r.verdict = "diverging";
    else
      r.verdict = "inconclusive";
    r.marks = s.marks;
    return r;
  }

  void build_axes() {
    axis_.resize(static_cast<std::size_t>(cfg_.grid));
    const double lo = z0_[0] - cfg_.window;
    const double h = 2.0 * cfg_.window / static_cast<double>(cfg_.grid - 1);
    for (long j = 0; j < cfg_.grid; ++j) axis_[static_cast<std::size_t>(j)] = lo + h * j;
    if (dim_ == 1) {
      const std::size_t n = axis_.size();
      den_.resize(n);
      pull_.resize(n);
      a_.assign(n, 0.0);
      reg_.assign(n, 0.0);
      m2_.assign(n, 0.0);
      e2cache_.assign(n, 0.0);
      rr_.assign(n, 0.0);
      have_.assign(n, 0);
      for (std::size_t j = 0; j < n; ++j) {
        const double u = axis_[j] - z0_[0];
        den_[j] = 1.0 + u * u;
      }
      // per-epsilon annulus bands as index ranges
      for (double eps : cfg_.epsilons) {
        Band b;
        b.lo1 = lower_index(z0_[0] - 1.0 / eps);
        b.hi1 = upper_index(z0_[0] - eps);
        b.lo2 = lower_index(z0_[0] + eps);
        b.hi2 = upper_index(z0_[0] + 1.0 / eps);
        bands_.push_back(b);
      }
    }
  }

  long lower_index(double v) const {
    auto it = std::lower_bound(axis_.begin(), axis_.end(), v);
    return static_cast<long>(it - axis_.begin());
  }

  long upper_index(double v) const {
    auto it = std::upper_bound(axis_.begin(), axis_.end(), v);
    return static_cast<long>(it - axis_.begin()) - 1;
  }

  void ensure_point(long t, long j, const History& h) {
    const std::size_t i = static_cast<std::size_t>(j);
    if (drive_.stationary && have_[i]) return;
    const Vec z{axis_[i]};
    const Vec rv = drive_.regression(t, z, h);
    const double r0 = rv[0];
    double m2;
    if (drive_.second_moment) {
      m2 = drive_.second_moment(t, z, h);
    } else {
      m2 = second_moment_estimate(drive_, t, z, h, cfg_.mc_n, mc_rng_).mean;
    }
    double e2;
    if (drive_.noise_second_moment) {
      e2 = drive_.noise_second_moment(t, z, h);
    } else {
      e2 = std::max(0.0, m2 - r0 * r0);
    }
    const double u = axis_[i] - z0_[0];
    reg_[i] = r0;
    m2_[i] = m2;
    e2cache_[i] = e2;
    a_[i] = 2.0 * u * r0;
    pull_[i] = -u * r0;
    rr_[i] = r0 * r0 / den_[i];
    have_[i] = 1;
  }

  StepScan scan_dim1(long t, double gamma, const ConvexRegion& region, const History& h) {
    StepScan s;
    s.nu.assign(per_eps_.size(), 1.0);        // inf over an empty set is 1
    s.neg_floor.assign(per_eps_.size(), 1.0);
    s.eps_empty.assign(per_eps_.size(), 1);

    const double lb = region.lower_bound(0);
    const double ub = region.upper_bound(0);
    const long ilo = lower_index(lb);
    const long ihi = upper_index(ub);
    if (ilo > ihi) {
      s.empty_mask = true;
      return s;
    }

    double qmax = 0.0, rmax = 0.0, emax = 0.0;
    long r_arg = ilo;
    for (long j = ilo; j <= ihi; ++j) {
      ensure_point(t, j, h);
      const std::size_t i = static_cast<std::size_t>(j);
      const double qv = pos_part(a_[i] + gamma * m2_[i]) / den_[i];
      if (qv > qmax) qmax = qv;
      if (rr_[i] > rmax) {
        rmax = rr_[i];
        r_arg = j;
      }
      const double ev = e2cache_[i] / den_[i];
      if (ev > emax) emax = ev;
      if (-pull_[i] > 1e-12 * (1.0 + std::fabs(reg_[i]))) ++s.sign_violations;
    }
    s.q = qmax;
    s.r = rmax;
    s.e = emax;
    // window truncation: the sup sits on the window edge while the region
    // extends beyond it
    if ((r_arg == static_cast<long>(axis_.size()) - 1 && ub > axis_.back()) ||
        (r_arg == 0 && lb < axis_.front()))
      ++s.edge_hits;

    for (std::size_t bi = 0; bi < bands_.size(); ++bi) {
      double numin = std::numeric_limits<double>::infinity();
      double flmin = std::numeric_limits<double>::infinity();
      bool any = false;
      auto scan_range = [&](long a, long b) {
        a = std::max(a, ilo);
        b = std::min(b, ihi);
        for (long j = a; j <= b; ++j) {
          const std::size_t i = static_cast<std::size_t>(j);
          any = true;
          if (pull_[i] < numin) numin = pull_[i];
          const double drift = gamma * a_[i] + gamma * gamma * m2_[i];
          const double nf = neg_part(drift);
          if (nf < flmin) flmin = nf;
        }
      };
      scan_range(bands_[bi].lo1, bands_[bi].hi1);
      scan_range(bands_[bi].lo2, bands_[bi].hi2);
      if (any) {
        s.nu[bi] = numin;
        s.neg_floor[bi] = flmin;
        s.eps_empty[bi] = 0;
      }
    }
    return s;
  }

  StepScan scan_general(long t, double gamma, const ConvexRegion& region, const History& h) {
    StepScan s;
    s.nu.assign(per_eps_.size(), 1.0);
    s.neg_floor.assign(per_eps_.size(), 1.0);
    s.eps_empty.assign(per_eps_.size(), 1);

    std::vector<long> idx(static_cast<std::size_t>(dim_), 0);
    Vec pt(static_cast<std::size_t>(dim_));
    bool any = false;
    double qmax = 0.0, rmax = 0.0, emax = 0.0;
    std::vector<double> numin(per_eps_.size(), std::numeric_limits<double>::infinity());
    std::vector<double> flmin(per_eps_.size(), std::numeric_limits<double>::infinity());
    std::vector<char> banded(per_eps_.size(), 0);

    for (;;) {
      for (int d = 0; d < dim_; ++d) {
        const double lo = z0_[static_cast<std::size_t>(d)] - cfg_.window;
        const double hstep = 2.0 * cfg_.window / static_cast<double>(cfg_.grid - 1);
        pt[static_cast<std::size_t>(d)] = lo + hstep * idx[static_cast<std::size_t>(d)];
      }
      if (region.contains(pt)) {
        any = true;
        const Vec u = sub(pt, z0_);
        const double den = 1.0 + dot(u, u);
        const Vec rv = drive_.regression(t, pt, h);
        double m2;
        if (drive_.second_moment)
          m2 = drive_.second_moment(t, pt, h);
        else
          m2 = second_moment_estimate(drive_, t, pt, h, cfg_.mc_n, mc_rng_).mean;
        double e2;
        if (drive_.noise_second_moment)
          e2 = drive_.noise_second_moment(t, pt, h);
        else
          e2 = std::max(0.0, m2 - dot(rv, rv));
        const double a = 2.0 * dot(u, rv);
        qmax = std::max(qmax, pos_part(a + gamma * m2) / den);
        rmax = std::max(rmax, dot(rv, rv) / den);
        emax = std::max(emax, e2 / den);
        if (dot(u, rv) > 1e-12 * (1.0 + norm2(rv))) ++s.sign_violations;
        const double nu = norm2(u);
        for (std::size_t bi = 0; bi < per_eps_.size(); ++bi) {
          const double eps = per_eps_[bi].epsilon;
          if (nu >= eps && nu <= 1.0 / eps) {
            banded[bi] = 1;
            numin[bi] = std::min(numin[bi], -dot(u, rv));
            flmin[bi] = std::min(flmin[bi], neg_part(gamma * a + gamma * gamma * m2));
          }
        }
      }
      int d = 0;
      for (; d < dim_; ++d) {
        if (++idx[static_cast<std::size_t>(d)] < cfg_.grid) break;
        idx[static_cast<std::size_t>(d)] = 0;
      }
      if (d == dim_) break;
    }

    if (!any) {
      s.empty_mask = true;
      return s;
    }
    s.q = qmax;
    s.r = rmax;
    s.e = emax;
    for (std::size_t bi = 0; bi < per_eps_.size(); ++bi) {
      if (banded[bi]) {
        s.nu[bi] = numin[bi];
        s.neg_floor[bi] = flmin[bi];
        s.eps_empty[bi] = 0;
      }
    }
    return s;
  }

  struct Band {
    long lo1, hi1, lo2, hi2;
  };

  const DriveField& drive_;
  const StepSchedule& step_;
  Vec z0_;
  LyapunovV lyap_;
  DiagnosticsConfig cfg_;
  long horizon_;
  int dim_ = 1;
  Rng mc_rng_;

  long tail_start_ = 1;
  std::vector<long> marks_;
  std::size_t mark_idx_ = 0;

  Series pos_drift_, neg_drift_, c1_, r2_, e2_;
  std::vector<EpsState> per_eps_;
  std::vector<Series*> registry_;

  double v_initial_ = 0.0, v_final_ = 0.0;
  double v_tail_max_ = -std::numeric_limits<double>::infinity();
  double v_tail_min_ = std::numeric_limits<double>::infinity();
  double v_tail_sum_ = 0.0;
  long v_tail_n_ = 0;

  long sign_violations_ = 0;
  long empty_mask_steps_ = 0;
  bool region_unbounded_seen_ = false;
  long window_edge_hits_ = 0;
  double last_q_ = 0.0, last_r_ = 0.0, last_e_ = 0.0;

  std::optional<ConvexRegion> prev_region_;
  std::vector<double> axis_, den_, pull_, a_, reg_, m2_, e2cache_, rr_;
  std::vector<char> have_;
  std::vector<Band> bands_;

  std::vector<double> last_row_;
};

/// Post-hoc monitor entry points: replay the recorded trajectory (bit-exact,
/// by seed determinism) through a fresh collector. The bundle must be the one
/// that produced the record.
inline ConditionReport run_monitors(const TrajectoryRecord& traj, const ModelBundle& bundle,
                                    const LyapunovV& lyap, DiagnosticsConfig cfg) {
  if (bundle.z0_true.empty()) throw std::invalid_argument("monitors: missing z0");
  DiagnosticsCollector collector(bundle.drive, bundle.step, bundle.z0_true, lyap, cfg,
                                 traj.horizon);
  run(bundle.drive, bundle.step, bundle.truncation, traj.z0, traj.horizon, traj.seed,
      traj.horizon, traj.x0,
      [&collector](const StepOutcome& o) { collector.on_step(o); });
  return collector.report();
}

inline ConditionReport pathwise_monitors(const TrajectoryRecord& traj, const ModelBundle& bundle,
                                      const LyapunovV& lyap, DiagnosticsConfig cfg = {}) {
  cfg.pathwise = true;
  cfg.uniform = false;
  return run_monitors(traj, bundle, lyap, cfg);
}

inline ConditionReport uniform_monitors(const TrajectoryRecord& traj,
                                          const ModelBundle& bundle,
                                          DiagnosticsConfig cfg = {}) {
  cfg.pathwise = false;
  cfg.uniform = true;
  return run_monitors(traj, bundle, LyapunovV::quadratic(), cfg);
}

}  // namespace truncsa

#endif  // TRUNCSA_DIAGNOSTICS_HPP
