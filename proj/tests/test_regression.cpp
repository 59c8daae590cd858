#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "valueprobe/metrics.hpp"
#include "valueprobe/stats.hpp"

using valueprobe::frequency_regression;
using valueprobe::RegressionResult;
namespace stats = valueprobe::stats;

namespace {

std::vector<double> random_vector(std::mt19937& rng, std::size_t n, double lo = -10.0,
                                  double hi = 10.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST_SUITE("stats.t_distribution") {
  TEST_CASE("quantiles match table values") {
    CHECK(stats::student_t_quantile(0.975, 7) == doctest::Approx(2.3646243).epsilon(1e-6));
    CHECK(stats::student_t_quantile(0.975, 30) == doctest::Approx(2.0422725).epsilon(1e-6));
    CHECK(stats::student_t_quantile(0.95, 10) == doctest::Approx(1.8124611).epsilon(1e-6));
    CHECK(stats::student_t_quantile(0.5, 5) == doctest::Approx(0.0));
    CHECK(stats::student_t_quantile(0.025, 7) ==
          doctest::Approx(-2.3646243).epsilon(1e-6));
  }

  TEST_CASE("cdf and quantile are inverse") {
    for (const double p : {0.6, 0.9, 0.99})
      for (const double df : {3.0, 12.0, 50.0})
        CHECK(stats::student_t_cdf(stats::student_t_quantile(p, df), df) ==
              doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_SUITE("regression.ols") {
  TEST_CASE("noiseless planted coefficients are recovered exactly") {
    std::mt19937 rng(17);
    std::vector<double> x1 = stats::standardize(random_vector(rng, 10));
    std::vector<double> x2 = stats::standardize(random_vector(rng, 10));
    std::vector<double> y(10);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 2.0 * x1[i] + 3.0 * x2[i] + 7.0;

    const RegressionResult r = frequency_regression(y, {{"x1", x1}, {"x2", x2}});
    CHECK(r.predictors[0].b == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.predictors[1].b == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(r.intercept == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("coefficients match the normal-equations oracle") {
    std::mt19937 rng(29);
    for (int round = 0; round < 25; ++round) {
      const std::size_t n = 10;
      const auto x1 = random_vector(rng, n);
      const auto x2 = random_vector(rng, n);
      auto y = random_vector(rng, n, -50.0, 50.0);

      const auto x1s = stats::standardize(x1);
      const auto x2s = stats::standardize(x2);
      const auto expected = oracle::ols_normal_equations(y, {x1s, x2s});

      const RegressionResult r = frequency_regression(y, {{"x1", x1}, {"x2", x2}});
      CAPTURE(round);
      CHECK(r.intercept == doctest::Approx(expected[0]).epsilon(1e-9));
      CHECK(r.predictors[0].b == doctest::Approx(expected[1]).epsilon(1e-9));
      CHECK(r.predictors[1].b == doctest::Approx(expected[2]).epsilon(1e-9));

      // fitted values reproduce R^2
      std::vector<double> fitted(n);
      for (std::size_t i = 0; i < n; ++i)
        fitted[i] = expected[0] + expected[1] * x1s[i] + expected[2] * x2s[i];
      CHECK(r.r_squared == doctest::Approx(oracle::r_squared(y, fitted)).epsilon(1e-12));
    }
  }

  TEST_CASE("sr2 equals the delta-R2 oracle and stays within [0, R2]") {
    std::mt19937 rng(31);
    for (int round = 0; round < 20; ++round) {
      const std::size_t n = 12;
      const auto x1 = random_vector(rng, n);
      const auto x2 = random_vector(rng, n);
      const auto y = random_vector(rng, n, 0.0, 100.0);
      const RegressionResult r = frequency_regression(y, {{"x1", x1}, {"x2", x2}});

      const auto x1s = stats::standardize(x1);
      const auto x2s = stats::standardize(x2);
      const auto full = oracle::ols_normal_equations(y, {x1s, x2s});
      const auto only1 = oracle::ols_normal_equations(y, {x1s});
      const auto only2 = oracle::ols_normal_equations(y, {x2s});

      std::vector<double> fit_full(n), fit_1(n), fit_2(n);
      for (std::size_t i = 0; i < n; ++i) {
        fit_full[i] = full[0] + full[1] * x1s[i] + full[2] * x2s[i];
        fit_1[i] = only1[0] + only1[1] * x1s[i];
        fit_2[i] = only2[0] + only2[1] * x2s[i];
      }
      const double r2_full = oracle::r_squared(y, fit_full);
      CHECK(r.predictors[0].sr2 ==
            doctest::Approx(r2_full - oracle::r_squared(y, fit_2)).epsilon(1e-9));
      CHECK(r.predictors[1].sr2 ==
            doctest::Approx(r2_full - oracle::r_squared(y, fit_1)).epsilon(1e-9));
      CHECK(r.predictors[0].sr2 >= -1e-12);
      CHECK(r.predictors[0].sr2 <= r.r_squared + 1e-12);
    }
  }

  TEST_CASE("beta equals b when the outcome is standardized too") {
    std::mt19937 rng(41);
    const auto x1 = random_vector(rng, 10);
    const auto x2 = random_vector(rng, 10);
    const auto y_raw = random_vector(rng, 10);
    const auto y = stats::standardize(y_raw);
    const RegressionResult r = frequency_regression(y, {{"x1", x1}, {"x2", x2}});
    for (const auto& p : r.predictors) CHECK(p.b == doctest::Approx(p.beta).epsilon(1e-9));
  }

  TEST_CASE("zero-order r is the plain correlation") {
    std::mt19937 rng(43);
    const auto x1 = random_vector(rng, 10);
    const auto y = random_vector(rng, 10);
    const RegressionResult r = frequency_regression(y, {{"x1", x1}});
    CHECK(r.predictors[0].r == doctest::Approx(oracle::pearson(x1, y)).epsilon(1e-12));
    // single predictor: sr2 is the full R^2, which is r^2
    CHECK(r.predictors[0].sr2 ==
          doctest::Approx(r.predictors[0].r * r.predictors[0].r).epsilon(1e-9));
  }

  TEST_CASE("confidence intervals are symmetric with the right half-width") {
    std::mt19937 rng(47);
    const auto x1 = random_vector(rng, 10);
    const auto x2 = random_vector(rng, 10);
    const auto y = random_vector(rng, 10);
    const RegressionResult r = frequency_regression(y, {{"x1", x1}, {"x2", x2}});
    CHECK(r.df == 7);
    const double t = stats::student_t_quantile(0.975, 7);
    for (const auto& p : r.predictors) {
      CHECK(p.b_hi - p.b == doctest::Approx(t * p.se_b).epsilon(1e-9));
      CHECK(p.b - p.b_lo == doctest::Approx(t * p.se_b).epsilon(1e-9));
    }
  }

  TEST_CASE("collinear predictors are rejected") {
    std::mt19937 rng(53);
    const auto x1 = random_vector(rng, 10);
    std::vector<double> x2 = x1;
    const auto y = random_vector(rng, 10);
    CHECK_THROWS_AS(frequency_regression(y, {{"x1", x1}, {"x2", x2}}), valueprobe::Error);
  }

  TEST_CASE("too few observations are rejected") {
    CHECK_THROWS_AS(frequency_regression(std::vector<double>{1.0, 2.0, 3.0},
                                         {{"x1", {1.0, 2.0, 3.5}}, {"x2", {0.0, 1.0, 0.5}}}),
                    valueprobe::Error);
  }

  TEST_CASE("item-corpus counts against published frequency medians give the published r") {
    // category totals of the item-prompt count matrix, circle order
    const std::vector<double> counts = {730, 839, 322, 1095, 1385, 1285, 665, 471, 819, 898};
    // median English frequency of the dictionary terms per category
    const std::vector<double> medians = {8353617,    9167246,  5326547, 7253663, 11453108,
                                         11874554.5, 5385188, 3816406, 17914947, 17571885.5};
    const RegressionResult r = frequency_regression(counts, {{"word_frequency", medians}});
    CHECK(std::round(r.predictors[0].r * 100.0) / 100.0 == 0.47);
  }
}
