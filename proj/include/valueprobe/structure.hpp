#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <nlohmann/json.hpp>

#include "valueprobe/count_matrix.hpp"
#include "valueprobe/errors.hpp"
#include "valueprobe/stats.hpp"
#include "valueprobe/values.hpp"

namespace valueprobe {

enum class CorrelationKind { spearman, pearson };
enum class DissimilarityKind { sqrt2, oneminus };

// Correlations between category column profiles across prompt classes.
// Spearman (Pearson on average ranks) by default; plain Pearson behind the
// flag for sensitivity analysis.
inline Eigen::MatrixXd rank_correlation_matrix(const CountMatrix& m,
                                               CorrelationKind kind = CorrelationKind::spearman) {
  if (m.rows() < 2) throw validation_error("correlation needs at least two rows");
  const std::size_t k = m.cols();
  std::vector<std::vector<double>> profiles(k, std::vector<double>(m.rows()));
  for (std::size_t j = 0; j < k; ++j) {
    bool constant = true;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      profiles[j][i] = static_cast<double>(m.cells[i][j]);
      constant = constant && m.cells[i][j] == m.cells[0][j];
    }
    if (constant)
      throw validation_error("constant column '" + m.col_labels[j] +
                             "': no variance for correlation");
  }

  Eigen::MatrixXd corr(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    corr(a, a) = 1.0;
    for (std::size_t b = a + 1; b < k; ++b) {
      const std::optional<double> r = kind == CorrelationKind::spearman
                                          ? stats::spearman(profiles[a], profiles[b])
                                          : stats::pearson(profiles[a], profiles[b]);
      corr(a, b) = corr(b, a) = r.value();
    }
  }
  return corr;
}

struct Dissimilarity {
  std::vector<std::string> labels;
  Eigen::MatrixXd d;

  void validate() const {
    const auto n = d.rows();
    if (d.cols() != n || static_cast<std::size_t>(n) != labels.size())
      throw validation_error("dissimilarity: shape mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d(i, i) != 0.0) throw validation_error("dissimilarity: nonzero diagonal");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (d(i, j) < 0.0) throw validation_error("dissimilarity: negative entry");
        if (std::fabs(d(i, j) - d(j, i)) > 1e-12)
          throw validation_error("dissimilarity: asymmetric matrix");
      }
    }
  }
};

// d = sqrt(2(1-r)): the Euclidean distance between standardized profiles.
// The 1-r variant is available behind the flag.
inline Dissimilarity to_dissimilarity(const Eigen::MatrixXd& corr,
                                      std::vector<std::string> labels,
                                      DissimilarityKind kind = DissimilarityKind::sqrt2) {
  Dissimilarity dis;
  dis.labels = std::move(labels);
  const auto n = corr.rows();
  dis.d.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = std::clamp(corr(i, j), -1.0, 1.0);
      dis.d(i, j) = kind == DissimilarityKind::sqrt2 ? std::sqrt(2.0 * (1.0 - r)) : 1.0 - r;
    }
    dis.d(i, i) = 0.0;
  }
  dis.validate();
  return dis;
}

struct Configuration {
  std::vector<std::string> labels;
  Eigen::MatrixXd coords;  // points x dimensions
  double stress = 0.0;     // normalized stress-1
  int iterations = 0;
  bool converged = false;
  std::vector<double> stress_history;  // one value per majorization step

  void validate() const {
    if (!coords.allFinite()) throw validation_error("configuration: non-finite coordinates");
    if (stress < 0.0 || stress > 1.0 + 1e-9)
      throw validation_error("configuration: stress outside [0,1]");
  }
};

namespace detail {

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
  return d;
}

// Classical (Torgerson) scaling: double-centred squared dissimilarities,
// top eigenpairs. Deterministic, and exact when the input is Euclidean.
inline Eigen::MatrixXd torgerson(const Eigen::MatrixXd& d, int dims) {
  const auto n = d.rows();
  const Eigen::MatrixXd d2 = d.array().square();
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd b = -0.5 * j * d2 * j;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  Eigen::MatrixXd coords(n, dims);
  for (int k = 0; k < dims; ++k) {
    const auto idx = n - 1 - k;  // eigenvalues ascend
    const double lambda = std::max(eig.eigenvalues()(idx), 0.0);
    coords.col(k) = eig.eigenvectors().col(idx) * std::sqrt(lambda);
  }
  return coords;
}

// Pool-adjacent-violators over tie blocks: pairs sorted by dissimilarity,
// equal dissimilarities pooled into one block, then a weighted monotone
// non-decreasing fit to the configuration distances.
inline std::vector<double> monotone_fit(std::span<const double> delta,
                                        std::span<const double> dist) {
  const std::size_t m = delta.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return delta[a] < delta[b]; });

  struct Block {
    double value;
    double weight;
    std::size_t first, last;  // range in 'order'
  };
  std::vector<Block> blocks;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    double sum = dist[order[i]];
    while (j + 1 < m && delta[order[j + 1]] == delta[order[i]]) {
      ++j;
      sum += dist[order[j]];
    }
    blocks.push_back({sum / static_cast<double>(j - i + 1),
                      static_cast<double>(j - i + 1), i, j});
    i = j + 1;
  }

  std::vector<Block> stack;
  for (const auto& block : blocks) {
    stack.push_back(block);
    while (stack.size() > 1 && stack[stack.size() - 2].value > stack.back().value) {
      const Block top = stack.back();
      stack.pop_back();
      Block& prev = stack.back();
      prev.value = (prev.value * prev.weight + top.value * top.weight) /
                   (prev.weight + top.weight);
      prev.weight += top.weight;
      prev.last = top.last;
    }
  }

  std::vector<double> fitted(m, 0.0);
  for (const auto& block : stack)
    for (std::size_t k = block.first; k <= block.last; ++k) fitted[order[k]] = block.value;
  return fitted;
}

// Guttman transform for unit weights: X' = B(X) X / n.
inline Eigen::MatrixXd guttman(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dhat) {
  const auto n = x.rows();
  const Eigen::MatrixXd dist = pairwise_distances(x);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || dist(i, j) <= 0.0) continue;
      b(i, j) = -dhat(i, j) / dist(i, j);
      diag -= b(i, j);
    }
    b(i, i) = diag;
  }
  return (b * x) / static_cast<double>(n);
}

inline Configuration ordinal_mds_from(const Dissimilarity& dis, Eigen::MatrixXd start,
                                      double eps, int max_iterations);

}  // namespace detail

// Ordinal (nonmetric) MDS by stress majorization: monotone regression of
// configuration distances on dissimilarity ranks, disparities normalized to
// a fixed sum of squares, Guttman updates. Deterministic Torgerson start;
// restarts > 0 adds that many seeded random starts and keeps the lowest
// stress. The recorded stress never increases between iterations.
inline Configuration ordinal_mds(const Dissimilarity& dis, int dims = 2, double eps = 1e-6,
                                 int max_iterations = 500, int restarts = 0) {
  dis.validate();
  const auto n = dis.d.rows();
  if (n < 3) throw validation_error("ordinal MDS needs at least three points");
  if (dis.d.maxCoeff() <= 0.0)
    throw validation_error("degenerate dissimilarity matrix: all entries zero");

  Configuration best = detail::ordinal_mds_from(dis, detail::torgerson(dis.d, dims), eps,
                                                max_iterations);
  std::mt19937_64 rng(12021);  // fixed seed keeps multi-start reproducible
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const double spread = dis.d.maxCoeff();
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd start(n, dims);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < dims; ++k) start(i, k) = coord(rng) * spread;
    Configuration candidate = detail::ordinal_mds_from(dis, std::move(start), eps,
                                                       max_iterations);
    if (candidate.stress < best.stress) best = std::move(candidate);
  }
  best.validate();
  return best;
}

namespace detail {

inline Configuration ordinal_mds_from(const Dissimilarity& dis, Eigen::MatrixXd start,
                                      double eps, int max_iterations) {
  const auto n = dis.d.rows();

  const std::size_t m = static_cast<std::size_t>(n) * (n - 1) / 2;
  std::vector<double> delta;
  delta.reserve(m);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      delta.push_back(dis.d(i, j));
      pairs.emplace_back(i, j);
    }

  Eigen::MatrixXd x = std::move(start);

  const auto disparities = [&](const Eigen::MatrixXd& dist_matrix,
                               std::vector<double>& flat) -> Eigen::MatrixXd {
    flat.resize(m);
    for (std::size_t k = 0; k < m; ++k) flat[k] = dist_matrix(pairs[k].first, pairs[k].second);
    std::vector<double> fitted = detail::monotone_fit(delta, flat);
    double ss = 0.0;
    for (const double v : fitted) ss += v * v;
    if (ss <= 0.0) throw validation_error("degenerate configuration: zero fitted disparities");
    const double scale = std::sqrt(static_cast<double>(m) / ss);
    Eigen::MatrixXd dhat = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < m; ++k) {
      const double v = fitted[k] * scale;
      dhat(pairs[k].first, pairs[k].second) = v;
      dhat(pairs[k].second, pairs[k].first) = v;
    }
    return dhat;
  };

  const auto stress_of = [&](const Eigen::MatrixXd& dhat, const Eigen::MatrixXd& dist_matrix) {
    double num = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double diff =
          dhat(pairs[k].first, pairs[k].second) - dist_matrix(pairs[k].first, pairs[k].second);
      num += diff * diff;
    }
    return std::sqrt(num / static_cast<double>(m));
  };

  std::vector<double> flat;
  Eigen::MatrixXd dist_matrix = detail::pairwise_distances(x);
  Eigen::MatrixXd dhat = disparities(dist_matrix, flat);
  double stress = stress_of(dhat, dist_matrix);

  Configuration config;
  config.labels = dis.labels;
  config.stress_history.push_back(stress);

  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    x = detail::guttman(x, dhat);
    dist_matrix = detail::pairwise_distances(x);
    dhat = disparities(dist_matrix, flat);
    const double next = stress_of(dhat, dist_matrix);
    config.stress_history.push_back(next);
    const double improvement = stress - next;
    stress = next;
    if (improvement < eps) {
      config.converged = true;
      ++iteration;
      break;
    }
  }

  config.coords = x;
  config.stress = stress;
  config.iterations = iteration;
  return config;
}

}  // namespace detail

struct ProcrustesTransform {
  Eigen::MatrixXd rotation;  // orthogonal, reflections allowed
  double scale = 1.0;
  Eigen::RowVectorXd translation;
};

struct FitResult {
  Eigen::MatrixXd rotated;  // observed mapped onto the target frame
  ProcrustesTransform transform;
  double phi_overall = 0.0;  // Tucker congruence of the centred coordinates
  std::vector<double> phi_dimension;
  double alienation = 1.0;
  // Configurational similarity over inter-point distances, the measure
  // conventionally reported next to its own alienation coefficient.
  double distance_congruence = 0.0;
  double distance_alienation = 1.0;
};

// Least-squares similarity transform (rotation/reflection, uniform scale,
// translation) of the observed configuration onto the target, with Tucker's
// congruence over the centred coordinates and per dimension.
inline FitResult procrustes_fit(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& target) {
  if (observed.rows() != target.rows() || observed.cols() != target.cols())
    throw validation_error("procrustes: configurations must have matching shape");
  if (observed.rows() < 2) throw validation_error("procrustes: need at least two points");

  const Eigen::RowVectorXd mu_a = observed.colwise().mean();
  const Eigen::RowVectorXd mu_b = target.colwise().mean();
  const Eigen::MatrixXd a = observed.rowwise() - mu_a;
  const Eigen::MatrixXd b = target.rowwise() - mu_b;
  const double norm_a = a.norm();
  const double norm_b = b.norm();
  if (norm_a <= 0.0 || norm_b <= 0.0)
    throw validation_error("procrustes: degenerate configuration with no spread");

  const Eigen::MatrixXd cross = a.transpose() * b;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
  const double trace_sigma = svd.singularValues().sum();
  const double scale = trace_sigma / (norm_a * norm_a);

  FitResult fit;
  fit.transform.rotation = rotation;
  fit.transform.scale = scale;
  fit.transform.translation = mu_b - scale * mu_a * rotation;
  fit.rotated = scale * (observed * rotation);
  fit.rotated.rowwise() += fit.transform.translation;

  const Eigen::MatrixXd aligned = a * rotation;
  fit.phi_overall = trace_sigma / (norm_a * norm_b);
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double num = aligned.col(k).dot(b.col(k));
    const double den = aligned.col(k).norm() * b.col(k).norm();
    fit.phi_dimension.push_back(den > 0.0 ? num / den : 0.0);
  }
  fit.alienation = std::sqrt(std::max(0.0, 1.0 - fit.phi_overall * fit.phi_overall));

  double num = 0.0, ssq_obs = 0.0, ssq_target = 0.0;
  for (Eigen::Index i = 0; i < observed.rows(); ++i)
    for (Eigen::Index j = i + 1; j < observed.rows(); ++j) {
      const double d_obs = (observed.row(i) - observed.row(j)).norm();
      const double d_tar = (target.row(i) - target.row(j)).norm();
      num += d_obs * d_tar;
      ssq_obs += d_obs * d_obs;
      ssq_target += d_tar * d_tar;
    }
  if (ssq_obs > 0.0 && ssq_target > 0.0) {
    fit.distance_congruence = num / std::sqrt(ssq_obs * ssq_target);
    fit.distance_alienation =
        std::sqrt(std::max(0.0, 1.0 - fit.distance_congruence * fit.distance_congruence));
  }
  return fit;
}

// Target coordinates: labels on the unit circle at angles 2*pi*k/n following
// the circle order, first value at angle zero.
inline Eigen::MatrixXd theoretical_target(std::span<const std::string> labels,
                                          std::span<const std::string> circle_order) {
  Eigen::MatrixXd target(static_cast<Eigen::Index>(labels.size()), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto pos = circle_position(labels[i], circle_order);
    if (!pos) throw validation_error("label '" + labels[i] + "' not in circle order");
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(*pos) /
                         static_cast<double>(circle_order.size());
    target(static_cast<Eigen::Index>(i), 0) = std::cos(angle);
    target(static_cast<Eigen::Index>(i), 1) = std::sin(angle);
  }
  return target;
}

struct StructureResult {
  Configuration configuration;
  Eigen::MatrixXd target;
  FitResult fit;
};

// Full structural replication: correlations between value columns, the
// Euclidean dissimilarity transform, 2-D ordinal MDS, and a procrustes
// rotation onto the theoretical circle.
inline StructureResult structure_report(const CountMatrix& m,
                                        const std::vector<std::string>& circle_order =
                                            circle_order_vector(),
                                        CorrelationKind correlation = CorrelationKind::spearman,
                                        DissimilarityKind dissimilarity = DissimilarityKind::sqrt2) {
  const CountMatrix agg = m.aggregated() ? m : aggregate_matrix(m, circle_order);
  const Eigen::MatrixXd corr = rank_correlation_matrix(agg, correlation);
  const Dissimilarity dis = to_dissimilarity(corr, agg.col_labels, dissimilarity);

  StructureResult result;
  result.configuration = ordinal_mds(dis);
  result.target = theoretical_target(result.configuration.labels, circle_order);
  result.fit = procrustes_fit(result.configuration.coords, result.target);
  return result;
}

inline nlohmann::json structure_to_json(const StructureResult& r) {
  const auto coords_json = [](const Eigen::MatrixXd& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) arr.push_back({m(i, 0), m(i, 1)});
    return arr;
  };
  return nlohmann::json{{"labels", r.configuration.labels},
                        {"stress", r.configuration.stress},
                        {"iterations", r.configuration.iterations},
                        {"converged", r.configuration.converged},
                        {"observed", coords_json(r.configuration.coords)},
                        {"rotated", coords_json(r.fit.rotated)},
                        {"target", coords_json(r.target)},
                        {"phi_overall", r.fit.phi_overall},
                        {"phi_dimension", r.fit.phi_dimension},
                        {"alienation", r.fit.alienation},
                        {"distance_congruence", r.fit.distance_congruence},
                        {"distance_alienation", r.fit.distance_alienation},
                        {"scale", r.fit.transform.scale}};
}

}  // namespace valueprobe
