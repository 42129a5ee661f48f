#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "truncsa/engine.hpp"
#include "truncsa/models.hpp"
#include "truncsa/specfun.hpp"

using namespace truncsa;

TEST_SUITE("models") {
  TEST_CASE("polynomial factory validates degree, noise and schedule") {
    CHECK_THROWS_AS(make_polynomial_example(2, 0.0, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_polynomial_example(-3, 0.0, {}, {}), std::invalid_argument);
    PolySchedule bad_delta;
    bad_delta.delta = 1.0 / 6.0;  // not < 1/(2l) for l = 3
    CHECK_THROWS_AS(make_polynomial_example(3, 0.0, {}, bad_delta), std::invalid_argument);
    PolySchedule bad_c;
    bad_c.c = 0.0;
    CHECK_THROWS_AS(make_polynomial_example(3, 0.0, {}, bad_c), std::invalid_argument);
    NoiseSpec bad_sigma;
    bad_sigma.sigma = -1.0;
    CHECK_THROWS_AS(make_polynomial_example(3, 0.0, bad_sigma, {}), std::invalid_argument);
    NoiseSpec bad_df;
    bad_df.kind = NoiseSpec::Kind::StudentT;
    bad_df.df = 2.0;
    CHECK_THROWS_AS(make_polynomial_example(3, 0.0, bad_df, {}), std::invalid_argument);

    // accepted power schedule: alpha_t = 10 t^(1/6 - 0.1) with gamma_t = 1/t
    PolySchedule power;
    power.c = 10.0;
    power.delta = 0.1;
    CHECK(make_polynomial_example(3, 1.0, {}, power).name == "poly");
  }

  TEST_CASE("log-bound schedule is accepted but degenerates at t = 1") {
    PolySchedule logsched;
    logsched.kind = PolySchedule::Kind::Log;
    logsched.c = 1.0;
    const ModelBundle b = make_polynomial_example(3, 0.0, {}, logsched);
    History h;
    CHECK_THROWS_AS(b.truncation.generator(1, h), std::invalid_argument);
    CHECK(b.truncation.generator(2, h).upper_bound(0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("gamma factory validates positivity") {
    CHECK_THROWS_AS(make_gamma_example(0.0, 0.5, 2.0), std::domain_error);
    CHECK_THROWS_AS(make_gamma_example(2.0, -0.5, 2.0), std::domain_error);
    CHECK_THROWS_AS(make_gamma_example(2.0, 0.5, 0.0), std::domain_error);
    CHECK(make_gamma_example(2.0, 0.5, 2.0).z0_true == Vec{2.0});
  }

  TEST_CASE("ar1 factory validates information and innovations") {
    CHECK_THROWS_AS(make_ar1_example(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(make_ar1_example(0.5, -1.0), std::domain_error);
    NoiseSpec scaled;
    scaled.sigma = 2.0;
    CHECK_THROWS_AS(make_ar1_example(0.5, 1.0, 0.0, scaled), std::invalid_argument);
    CHECK(make_ar1_example(1.5, 1.0).z0_true == Vec{1.5});
  }

  TEST_CASE("every drive vanishes at its declared root") {
    History h;
    h.append(0.7);
    {
      const ModelBundle b = make_polynomial_example(3, 1.25, {}, {});
      CHECK(b.drive.regression(1, b.z0_true, h) == Vec{0.0});
    }
    {
      const ModelBundle b = make_gamma_example(2.3, 0.5, 2.0);
      CHECK(std::fabs(b.drive.regression(1, b.z0_true, h)[0]) <= 1e-10);
    }
    {
      const ModelBundle b = make_ar1_example(0.8, 1.0, 1.7);
      History ah(1.7);
      ah.append(0.3);
      CHECK(ah.x(0) == 1.7);
      CHECK(b.drive.regression(1, b.z0_true, ah) == Vec{0.0});
    }
  }

  TEST_CASE("gamma pull points toward the root everywhere") {
    const double theta = 2.0;
    const ModelBundle b = make_gamma_example(theta, 0.5, 2.0);
    History h;
    for (double u = 0.05; u < 50.0; u *= 1.31) {
      if (std::fabs(u - theta) < 1e-9) continue;
      const double r = b.drive.regression(1, {u}, h)[0];
      CHECK((u - theta) * r < 0.0);
    }
  }

  TEST_CASE("gamma sampler has the right first moment" * doctest::timeout(120)) {
    Rng rng(31);
    for (const double theta : {0.3, 1.0, 2.0, 5.0}) {
      const long n = 1'000'000;
      std::vector<double> xs(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = rng.gamma_shape(theta);
      const auto st = oracles::stats(xs);
      CHECK(std::fabs(st.mean - theta) <= 4.0 * st.se_mean);
    }
  }

  TEST_CASE("noiseless ar1 identifies the parameter in one observation") {
    NoiseSpec off;
    off.kind = NoiseSpec::Kind::None;
    const ModelBundle b = make_ar1_example(0.7, 1e-12, 1.0, off);
    const TrajectoryRecord rec = run(b.drive, b.step, b.truncation, {-0.3}, 1, 1, 1, b.x0);
    CHECK(rec.z_final[0] == doctest::Approx(0.7).epsilon(1e-9));
  }

  TEST_CASE("ar1 accumulated information grows like the stationary variance" *
            doctest::timeout(120)) {
    const double theta = 0.5, i0 = 1.0;
    const long horizon = 100'000;
    const ModelBundle b = make_ar1_example(theta, i0);
    double info_final = 0.0;
    run(b.drive, b.step, b.truncation, {0.0}, horizon, 77, horizon, b.x0,
        [&](const StepOutcome& o) {
          if (o.t == horizon)
            info_final = i0 + o.history->prefix_sum_sq(o.t - 1);
        });
    const double limit = 1.0 / (1.0 - theta * theta);
    CHECK(std::fabs(info_final / static_cast<double>(horizon) - limit) <= 0.05 * limit);

    // independent long-run oracle: plain AR recursion, separate stream
    Rng rng(123456);
    double x = 0.0, acc = 0.0;
    for (long t = 1; t <= horizon; ++t) {
      x = theta * x + rng.normal();
      acc += x * x;
    }
    CHECK(std::fabs(acc / static_cast<double>(horizon) - limit) <= 0.05 * limit);
  }

  TEST_CASE("information-ratio series: one stabilizes while the other grows") {
    const double theta = 0.5, i0 = 1.0;
    const long horizon = 20'000;
    const ModelBundle b = make_ar1_example(theta, i0);
    double s1 = 0.0, s2 = 0.0, s1_tail_start = 0.0, s2_tail_start = 0.0;
    run(b.drive, b.step, b.truncation, {0.0}, horizon, 99, horizon, b.x0,
        [&](const StepOutcome& o) {
          const double w = o.history->x(o.t - 1) * o.history->x(o.t - 1);
          const double info = i0 + o.history->prefix_sum_sq(o.t - 1);
          s1 += w / info;
          s2 += w / (info * info);
          if (o.t == horizon / 10) {
            s1_tail_start = s1;
            s2_tail_start = s2;
          }
        });
    CHECK(s2 - s2_tail_start <= 1e-3 * s2);   // summable-looking
    CHECK(s1 - s1_tail_start >= 1e-2 * s1);   // still growing
    CHECK(s1 - s1_tail_start >= 2.0 * (s2 - s2_tail_start));
  }

  TEST_CASE("explosive ar1 overflows double precision and poisons the trajectory") {
    const ModelBundle b = make_ar1_example(1.5, 1.0);
    try {
      run(b.drive, b.step, b.truncation, {0.0}, 100'000, 31, 100'000, b.x0);
      FAIL("expected TrajectoryError");
    } catch (const TrajectoryError& e) {
      // X_t^2 ~ 1.5^(2t) passes 1.8e308 near t = 875
      CHECK(e.t > 500);
      CHECK(e.t < 1500);
    }
  }

  TEST_CASE("analytic second moments match Monte Carlo at random states" *
            doctest::timeout(300)) {
    Rng rng(41);
    const long n = 200'000;
    // gamma
    {
      const ModelBundle b = make_gamma_example(2.0, 0.5, 2.0);
      History h;
      for (int i = 0; i < 10; ++i) {
        const Vec z{std::exp(rng.uniform(std::log(0.2), std::log(8.0)))};
        const MomentEstimate e = second_moment_estimate(b.drive, 1, z, h, n, rng);
        CHECK(std::fabs(e.mean - b.drive.second_moment(1, z, h)) <=
              4.0 * e.std_error + 1e-12);
      }
    }
    // ar1 with a simulated past
    {
      const ModelBundle b = make_ar1_example(0.6, 1.0);
      History h(0.0);
      Rng path(6);
      for (long t = 1; t <= 6; ++t) h.append(b.drive.observe(t, h, path));
      for (int i = 0; i < 10; ++i) {
        const Vec z{rng.uniform(-1.5, 1.5)};
        const MomentEstimate e = second_moment_estimate(b.drive, 7, z, h, n, rng);
        CHECK(std::fabs(e.mean - b.drive.second_moment(7, z, h)) <=
              4.0 * e.std_error + 1e-12);
      }
    }
    // polynomial with student-t noise
    {
      NoiseSpec tnoise;
      tnoise.kind = NoiseSpec::Kind::StudentT;
      tnoise.df = 6.0;
      const ModelBundle b = make_polynomial_example(3, 1.0, tnoise, {});
      History h;
      for (int i = 0; i < 10; ++i) {
        const Vec z{rng.uniform(-2.0, 4.0)};
        const MomentEstimate e = second_moment_estimate(b.drive, 1, z, h, n, rng);
        CHECK(std::fabs(e.mean - b.drive.second_moment(1, z, h)) <=
              4.0 * e.std_error + 1e-12);
      }
    }
  }

  TEST_CASE("slowly growing noise variant") {
    NoiseSpec grow;
    grow.log_growth = true;
    const ModelBundle b = make_polynomial_example(3, 0.0, grow, {});
    History h;
    CHECK(b.drive.noise_second_moment(1, {0.0}, h) == 0.0);  // log 1 = 0
    CHECK(b.drive.noise_second_moment(5, {0.0}, h) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-15));
    CHECK(!b.drive.stationary);
    // the expanding bounds keep the growing-variance recursion in hand
    const TrajectoryRecord rec = run(b.drive, b.step, b.truncation, {1.5}, 5000, 6, 5000);
    CHECK(std::fabs(rec.z_final[0]) < 1.0);
  }

  TEST_CASE("bundle defaults are usable") {
    const ModelBundle g = make_gamma_example(2.0, 0.5, 2.0);
    CHECK(g.init_lo > 0.0);
    CHECK(g.init_lo < g.init_hi);
    const ModelBundle p = make_polynomial_example(3, 1.0, {}, {});
    CHECK(p.init_lo < p.init_hi);
    CHECK(p.z0_true == Vec{1.0});
    const ModelBundle a = make_ar1_example(0.5, 1.0);
    CHECK(a.x0 == 0.0);
  }
}
