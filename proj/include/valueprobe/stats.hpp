#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "valueprobe/errors.hpp"

namespace valueprobe::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw validation_error("mean of empty vector");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator).
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw validation_error("sample sd needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Median with the midpoint-of-two rule for even counts.
inline double median(std::vector<double> v) {
  if (v.empty()) throw validation_error("median of empty vector");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw validation_error("pearson needs two equal-length vectors of size >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Ranks starting at 1, ties averaged.
inline std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Spearman correlation: Pearson on average ranks.
inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace detail {

// Regularized incomplete beta via Lentz's continued fraction.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

inline double student_t_cdf(double t, double df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * detail::incomplete_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - p : p;
}

// Quantile of Student's t by bisection on the CDF.
inline double student_t_quantile(double p, double df) {
  if (p <= 0.0 || p >= 1.0) throw validation_error("t quantile needs p in (0,1)");
  if (df <= 0.0) throw validation_error("t quantile needs df > 0");
  if (p == 0.5) return 0.0;
  double lo = -1e8, hi = 1e8;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> standardize(std::span<const double> v) {
  const double m = mean(v);
  const double sd = sample_sd(v);
  if (sd <= 0.0) throw validation_error("cannot standardize a constant vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
  return out;
}

struct OlsFit {
  double intercept = 0.0;
  std::vector<double> coef;
  std::vector<double> se;           // aligned with coef
  double se_intercept = 0.0;
  double r_squared = 0.0;
  double sigma2 = 0.0;              // residual variance
  int df = 0;                       // n - predictors - 1
  std::vector<double> fitted;
};

// Ordinary least squares with intercept. Throws on near-singular designs.
inline OlsFit ols(std::span<const double> y, const std::vector<std::vector<double>>& predictors,
                  double condition_tolerance = 1e10) {
  const std::size_t n = y.size();
  const std::size_t p = predictors.size();
  if (n < p + 2) throw validation_error("ols needs n >= predictors + 2");
  for (const auto& col : predictors)
    if (col.size() != n) throw validation_error("ols predictor length mismatch");

  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) design(i, j + 1) = predictors[j][i];
    yv(i) = y[i];
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > condition_tolerance)
    throw validation_error("collinear predictors: design matrix condition number beyond tolerance");

  const Eigen::VectorXd beta = svd.solve(yv);
  const Eigen::VectorXd fitted = design * beta;
  const Eigen::VectorXd resid = yv - fitted;

  OlsFit fit;
  fit.intercept = beta(0);
  fit.coef.assign(beta.data() + 1, beta.data() + 1 + p);
  fit.df = static_cast<int>(n) - static_cast<int>(p) - 1;
  const double sse = resid.squaredNorm();
  const double sst = (yv.array() - yv.mean()).matrix().squaredNorm();
  fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
  fit.sigma2 = fit.df > 0 ? sse / fit.df : 0.0;

  const Eigen::MatrixXd xtx_inv = (design.transpose() * design).inverse();
  fit.se_intercept = std::sqrt(fit.sigma2 * xtx_inv(0, 0));
  fit.se.resize(p);
  for (std::size_t j = 0; j < p; ++j) fit.se[j] = std::sqrt(fit.sigma2 * xtx_inv(j + 1, j + 1));
  fit.fitted.assign(fitted.data(), fitted.data() + n);
  return fit;
}

}  // namespace valueprobe::stats
