#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "truncsa/rng.hpp"
#include "truncsa/specfun.hpp"

using namespace truncsa;

TEST_SUITE("specfun") {
  TEST_CASE("PositiveReal validates its domain") {
    CHECK(PositiveReal(1e-300).value() == 1e-300);
    CHECK(PositiveReal(3.5).value() == 3.5);
    CHECK_THROWS_AS(PositiveReal(0.0), std::domain_error);
    CHECK_THROWS_AS(PositiveReal(-1.0), std::domain_error);
    CHECK_THROWS_AS(PositiveReal(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(PositiveReal(std::numeric_limits<double>::infinity()), std::domain_error);
  }

  TEST_CASE("domain violations throw") {
    CHECK_THROWS_AS(digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(digamma(-2.5), std::domain_error);
    CHECK_THROWS_AS(trigamma(0.0), std::domain_error);
    CHECK_THROWS_AS(trigamma(std::nan("")), std::domain_error);
  }

  TEST_CASE("values at small integers and halves against the series oracles") {
    // trigamma(1) = pi^2/6, via the defining series summed far out
    const auto tg1 = oracles::trigamma_series(1.0, 10'000'000);
    CHECK(std::fabs(tg1.value - 1.6449340668482264) < 1e-12);
    CHECK(std::fabs(trigamma(1.0) - tg1.value) <= 1e-12 * tg1.value);

    const auto tg_half = oracles::trigamma_series(0.5, 2'000'000);
    CHECK(std::fabs(tg_half.value - 4.9348022005446793) < 1e-11);
    CHECK(std::fabs(trigamma(0.5) - tg_half.value) <= 1e-12 * tg_half.value);

    // digamma(1) = -EulerGamma, digamma(0.5) = -EulerGamma - 2 log 2
    const auto dg1 = oracles::digamma_shift(1.0, 1'000'000);
    CHECK(std::fabs(dg1.value + 0.57721566490153287) < 1e-12);
    CHECK(std::fabs(digamma(1.0) - dg1.value) <= 1e-12);

    const auto dg_half = oracles::digamma_shift(0.5, 1'000'000);
    CHECK(std::fabs(dg_half.value + 1.9635100260214235) < 1e-12);
    CHECK(std::fabs(digamma(0.5) - dg_half.value) <= 1e-12 * std::fabs(dg_half.value));

    // digamma(2) = 1 - EulerGamma
    CHECK(digamma(2.0) == doctest::Approx(0.42278433509846714).epsilon(1e-13));
  }

  TEST_CASE("monotonicity") {
    CHECK(digamma(2.0) > digamma(1.0));
    CHECK(trigamma(2.0) < trigamma(1.0));
    double prev_dg = digamma(0.01);
    double prev_tg = trigamma(0.01);
    for (double x = 0.05; x < 50.0; x *= 1.7) {
      CHECK(digamma(x) > prev_dg);
      CHECK(trigamma(x) < prev_tg);
      prev_dg = digamma(x);
      prev_tg = trigamma(x);
    }
  }

  TEST_CASE("bound sandwich on a wide log grid") {
    const long n = 10000;
    const double llo = std::log(1e-3), lhi = std::log(1e3);
    for (long i = 0; i < n; ++i) {
      const double x = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                          static_cast<double>(n - 1));
      const double tg = trigamma(x);
      const double dg = digamma(x);
      CHECK(tg >= 1.0 / x - 1e-14 * tg);
      CHECK(tg <= (1.0 + x) / (x * x) + 1e-14 * tg);
      CHECK(dg <= std::log(x) + 1e-14 * (1.0 + std::fabs(std::log(x))));
    }
  }

  TEST_CASE("recurrence identities") {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
      const double x = std::exp(rng.uniform(std::log(1e-3), std::log(100.0)));
      const double d_step = digamma(x + 1.0) - digamma(x);
      CHECK(std::fabs(d_step - 1.0 / x) <= 1e-12 * (1.0 / x));
      const double t_step = trigamma(x) - trigamma(x + 1.0);
      CHECK(std::fabs(t_step - 1.0 / (x * x)) <= 1e-12 * (1.0 / (x * x)));
    }
  }

  TEST_CASE("series-oracle agreement on random arguments") {
    Rng rng(102);
    for (int i = 0; i < 300; ++i) {
      const double x = std::exp(rng.uniform(std::log(1e-2), std::log(100.0)));
      const auto tg = oracles::trigamma_series(x, 500'000);
      CHECK(std::fabs(trigamma(x) - tg.value) <= 1e-12 * tg.value);
      const auto dg = oracles::digamma_shift(x, 500'000);
      CHECK(std::fabs(digamma(x) - dg.value) <=
            1e-12 * std::max(1.0, std::fabs(dg.value)));
    }
  }

  TEST_CASE("log-moment identities of the Gamma family" * doctest::timeout(300)) {
    Rng rng(103);
    for (const double theta : {0.5, 1.0, 2.0, 5.0}) {
      const long n = 1'000'000;
      std::vector<double> logs(n);
      for (long i = 0; i < n; ++i) logs[static_cast<std::size_t>(i)] =
          std::log(rng.gamma_shape(theta));
      const auto st = oracles::stats(logs);
      CHECK(std::fabs(st.mean - digamma(theta)) <= 4.0 * st.se_mean);
      CHECK(std::fabs(st.var - trigamma(theta)) <= 4.0 * st.se_var);
    }
  }
}
