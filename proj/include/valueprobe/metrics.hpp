#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "valueprobe/count_matrix.hpp"
#include "valueprobe/errors.hpp"
#include "valueprobe/lexicon.hpp"
#include "valueprobe/stats.hpp"
#include "valueprobe/values.hpp"

namespace valueprobe {

// Hits over false negatives. Perfect fidelity maps to +infinity.
inline double signal_noise(double validity) {
  if (validity < 0.0 || validity > 1.0)
    throw validation_error("signal_noise needs validity in [0,1]");
  if (validity == 1.0) return std::numeric_limits<double>::infinity();
  return validity / (1.0 - validity);
}

// Expected count pattern for one value: 5 at the value itself, decreasing
// linearly with circular distance to 0 at the opposite side. Entry j is the
// expectation for circle_order[j].
inline std::vector<double> expected_profile(std::string_view value_code,
                                            std::span<const std::string> circle_order) {
  const auto self = circle_position(value_code, circle_order);
  if (!self) throw validation_error("value '" + std::string(value_code) + "' not in circle order");
  std::vector<double> profile(circle_order.size());
  for (std::size_t j = 0; j < circle_order.size(); ++j)
    profile[j] = 5.0 - static_cast<double>(circular_distance(*self, j, circle_order.size()));
  return profile;
}

// One row or column of the metric battery. Undefined quantities (zero
// totals, zero variance) stay unset instead of collapsing to zero.
struct CellMetric {
  std::string id;
  bool hit = false;
  bool tie = false;
  std::optional<double> validity;
  std::optional<double> snr;
  std::optional<double> profile_match;
};

struct MetricSummary {
  std::optional<double> hit_rate;
  std::optional<double> mean_validity;
  std::optional<double> mean_snr;
  std::optional<double> mean_profile_match;
};

struct MetricTable {
  std::vector<CellMetric> rows;     // concept side: one per prompt class
  std::vector<CellMetric> columns;  // discriminant side: one per value category
  std::vector<long long> row_total;
  std::vector<long long> column_total;
  MetricSummary concept_summary;
  MetricSummary discriminant_summary;
};

namespace detail {

// Hit: the maximum is attained only on the congruent side. Tie: both sides
// reach it.
struct HitState {
  bool hit = false;
  bool tie = false;
};

inline std::optional<double> mean_defined(std::span<const CellMetric> cells,
                                          std::optional<double> CellMetric::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : cells) {
    const auto& v = c.*field;
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace detail

// Row hits: the congruent cell is the strict maximum of its row. Ties are
// reported, not resolved.
inline std::vector<detail::HitState> row_hits(const CountMatrix& m) {
  std::vector<detail::HitState> hits(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto& row = m.cells[i];
    const long long best = *std::max_element(row.begin(), row.end());
    const bool group_max = row[m.congruent_col[i]] == best;
    bool other_max = false;
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (j != m.congruent_col[i] && row[j] == best) other_max = true;
    hits[i].hit = group_max && !other_max;
    hits[i].tie = group_max && other_max;
  }
  return hits;
}

// Column hits: the column maximum lies in congruent rows only. On a fine
// matrix the congruent rows are all rows whose parent is that column.
inline std::vector<detail::HitState> column_hits(const CountMatrix& m) {
  std::vector<detail::HitState> hits(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    long long best = std::numeric_limits<long long>::min();
    for (std::size_t i = 0; i < m.rows(); ++i) best = std::max(best, m.cells[i][j]);
    bool group_max = false, other_max = false;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (m.cells[i][j] != best) continue;
      (m.congruent_col[i] == j ? group_max : other_max) = true;
    }
    hits[j].hit = group_max && !other_max;
    hits[j].tie = group_max && other_max;
  }
  return hits;
}

// Congruent cell over row total, at full precision; undefined on empty rows.
inline std::vector<std::optional<double>> concept_validity(const CountMatrix& m) {
  const auto totals = row_totals(m);
  std::vector<std::optional<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (totals[i] == 0) continue;
    out[i] = static_cast<double>(m.cells[i][m.congruent_col[i]]) /
             static_cast<double>(totals[i]);
  }
  return out;
}

// Congruent-row sum over column total; undefined on empty columns.
inline std::vector<std::optional<double>> discriminant_validity(const CountMatrix& m) {
  const auto totals = column_totals(m);
  std::vector<std::optional<double>> out(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (totals[j] == 0) continue;
    long long congruent = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (m.congruent_col[i] == j) congruent += m.cells[i][j];
    out[j] = static_cast<double>(congruent) / static_cast<double>(totals[j]);
  }
  return out;
}

// Pearson correlation between an observed row and the expected profile of
// its congruent value; undefined at zero variance.
inline std::vector<std::optional<double>> row_profile_match(
    const CountMatrix& m, std::span<const std::string> circle_order) {
  std::vector<std::optional<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto& value = m.col_labels[m.congruent_col[i]];
    const auto self = circle_position(value, circle_order);
    if (!self) throw validation_error("column '" + value + "' not in circle order");
    std::vector<double> observed(m.cols()), expected(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
      observed[j] = static_cast<double>(m.cells[i][j]);
      const auto pos = circle_position(m.col_labels[j], circle_order);
      if (!pos) throw validation_error("column '" + m.col_labels[j] + "' not in circle order");
      expected[j] =
          5.0 - static_cast<double>(circular_distance(*self, *pos, circle_order.size()));
    }
    out[i] = stats::pearson(observed, expected);
  }
  return out;
}

// Same for a column read across aggregated prompt rows.
inline std::vector<std::optional<double>> column_profile_match(
    const CountMatrix& agg, std::span<const std::string> circle_order) {
  std::vector<std::optional<double>> out(agg.cols());
  for (std::size_t j = 0; j < agg.cols(); ++j) {
    const auto self = circle_position(agg.col_labels[j], circle_order);
    if (!self) throw validation_error("column '" + agg.col_labels[j] + "' not in circle order");
    if (agg.rows() < 2) continue;
    std::vector<double> observed(agg.rows()), expected(agg.rows());
    for (std::size_t i = 0; i < agg.rows(); ++i) {
      observed[i] = static_cast<double>(agg.cells[i][j]);
      const auto pos = circle_position(agg.row_labels[i], circle_order);
      if (!pos) throw validation_error("row '" + agg.row_labels[i] + "' not in circle order");
      expected[i] =
          5.0 - static_cast<double>(circular_distance(*self, *pos, circle_order.size()));
    }
    out[j] = stats::pearson(observed, expected);
  }
  return out;
}

// Computes the full battery for a matrix: per-row concept metrics on the
// input, per-column discriminant metrics on its aggregation, and summary
// means over the defined entries.
inline MetricTable compute_metric_table(const CountMatrix& m,
                                        const std::vector<std::string>& circle_order =
                                            circle_order_vector()) {
  MetricTable table;
  table.row_total = row_totals(m);
  table.column_total = column_totals(m);

  const auto rhits = row_hits(m);
  const auto rvalidity = concept_validity(m);
  const auto rprofile = row_profile_match(m, circle_order);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CellMetric cell;
    cell.id = m.row_labels[i];
    cell.hit = rhits[i].hit;
    cell.tie = rhits[i].tie;
    cell.validity = rvalidity[i];
    if (rvalidity[i]) cell.snr = signal_noise(*rvalidity[i]);
    cell.profile_match = rprofile[i];
    table.rows.push_back(std::move(cell));
  }

  const CountMatrix agg = m.aggregated() ? m : aggregate_matrix(m, circle_order);
  const auto chits = column_hits(m);
  const auto cvalidity = discriminant_validity(agg);
  const auto cprofile = column_profile_match(agg, circle_order);
  for (std::size_t j = 0; j < m.cols(); ++j) {
    CellMetric cell;
    cell.id = m.col_labels[j];
    cell.hit = chits[j].hit;
    cell.tie = chits[j].tie;
    const std::size_t ja = agg.col_index(m.col_labels[j]);
    cell.validity = cvalidity[ja];
    if (cell.validity) cell.snr = signal_noise(*cell.validity);
    cell.profile_match = cprofile[ja];
    table.columns.push_back(std::move(cell));
  }

  const auto summarize = [](std::span<const CellMetric> cells) {
    MetricSummary s;
    if (!cells.empty()) {
      std::size_t hits = 0;
      for (const auto& c : cells) hits += c.hit ? 1 : 0;
      s.hit_rate = static_cast<double>(hits) / static_cast<double>(cells.size());
    }
    s.mean_validity = detail::mean_defined(cells, &CellMetric::validity);
    s.mean_snr = detail::mean_defined(cells, &CellMetric::snr);
    s.mean_profile_match = detail::mean_defined(cells, &CellMetric::profile_match);
    return s;
  };
  table.concept_summary = summarize(table.rows);
  table.discriminant_summary = summarize(table.columns);
  return table;
}

// --- frequency / preference regression -------------------------------------

struct RegressionPredictor {
  std::string name;
  double b = 0.0, b_lo = 0.0, b_hi = 0.0, se_b = 0.0;
  double beta = 0.0, beta_lo = 0.0, beta_hi = 0.0, se_beta = 0.0;
  double sr2 = 0.0;  // squared semi-partial correlation
  double r = 0.0;    // zero-order correlation with the outcome
};

struct RegressionResult {
  std::vector<RegressionPredictor> predictors;
  double intercept = 0.0, intercept_lo = 0.0, intercept_hi = 0.0, se_intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  int df = 0;
};

// OLS of the outcome on standardized predictors, with t-based 95% intervals,
// standardized betas from a refit on the standardized outcome, and sr^2 as
// the R^2 drop from omitting each predictor.
inline RegressionResult frequency_regression(
    std::span<const double> outcome,
    const std::vector<std::pair<std::string, std::vector<double>>>& predictors) {
  if (predictors.empty()) throw validation_error("regression needs at least one predictor");
  const std::size_t n = outcome.size();

  std::vector<std::vector<double>> scaled;
  scaled.reserve(predictors.size());
  for (const auto& [name, values] : predictors) {
    if (values.size() != n)
      throw validation_error("predictor '" + name + "' length mismatch");
    scaled.push_back(stats::standardize(values));
  }

  const auto fit = stats::ols(outcome, scaled);
  const std::vector<double> outcome_std = stats::standardize(outcome);
  const auto fit_std = stats::ols(outcome_std, scaled);

  RegressionResult result;
  result.n = n;
  result.df = fit.df;
  result.r_squared = fit.r_squared;
  const double t = stats::student_t_quantile(0.975, fit.df);
  result.intercept = fit.intercept;
  result.se_intercept = fit.se_intercept;
  result.intercept_lo = fit.intercept - t * fit.se_intercept;
  result.intercept_hi = fit.intercept + t * fit.se_intercept;

  for (std::size_t j = 0; j < predictors.size(); ++j) {
    RegressionPredictor p;
    p.name = predictors[j].first;
    p.b = fit.coef[j];
    p.se_b = fit.se[j];
    p.b_lo = p.b - t * p.se_b;
    p.b_hi = p.b + t * p.se_b;
    p.beta = fit_std.coef[j];
    p.se_beta = fit_std.se[j];
    p.beta_lo = p.beta - t * p.se_beta;
    p.beta_hi = p.beta + t * p.se_beta;

    if (predictors.size() == 1) {
      p.sr2 = fit.r_squared;
    } else {
      std::vector<std::vector<double>> reduced;
      for (std::size_t k = 0; k < scaled.size(); ++k)
        if (k != j) reduced.push_back(scaled[k]);
      p.sr2 = fit.r_squared - stats::ols(outcome, reduced).r_squared;
    }
    const auto r = stats::pearson(predictors[j].second, outcome);
    p.r = r ? *r : std::numeric_limits<double>::quiet_NaN();
    result.predictors.push_back(std::move(p));
  }
  return result;
}

// --- English word-frequency baseline ----------------------------------------

// word -> occurrence count table, prefix-queryable for wildcard entries.
class UnigramTable {
 public:
  void add(std::string word, double count) { rows_.emplace_back(std::move(word), count); }

  void finalize() {
    std::sort(rows_.begin(), rows_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  static UnigramTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open unigram file: " + path);
    UnigramTable table;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::size_t comma = line.find(',');
      if (comma == std::string::npos)
        throw validation_error(path + " line " + std::to_string(line_number) +
                               ": expected 'word,count'");
      std::string word(text::trim(line.substr(0, comma)));
      const std::string count_text(text::trim(line.substr(comma + 1)));
      if (line_number == 1 && word == "word" && count_text == "count") continue;  // header
      try {
        std::size_t used = 0;
        const double count = std::stod(count_text, &used);
        if (used != count_text.size() || count < 0) throw std::invalid_argument("bad");
        table.add(text::to_lower_copy(word), count);
      } catch (const std::exception&) {
        throw validation_error(path + " line " + std::to_string(line_number) +
                               ": count '" + count_text + "' is not a non-negative number");
      }
    }
    table.finalize();
    return table;
  }

  std::optional<double> exact(std::string_view word) const {
    const auto it = std::lower_bound(
        rows_.begin(), rows_.end(), word,
        [](const auto& row, std::string_view w) { return row.first < w; });
    if (it == rows_.end() || it->first != word) return std::nullopt;
    return it->second;
  }

  // Total count over all words sharing the prefix; nullopt when none match.
  std::optional<double> prefix_sum(std::string_view prefix) const {
    auto it = std::lower_bound(rows_.begin(), rows_.end(), prefix,
                               [](const auto& row, std::string_view p) { return row.first < p; });
    double sum = 0.0;
    bool any = false;
    for (; it != rows_.end() && it->first.compare(0, prefix.size(), prefix) == 0; ++it) {
      sum += it->second;
      any = true;
    }
    if (!any) return std::nullopt;
    return sum;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::pair<std::string, double>> rows_;
};

struct CategoryFrequencyStats {
  std::string category;
  std::size_t terms = 0;    // entries with a table match
  std::size_t missing = 0;  // entries matching nothing, reported not dropped
  std::optional<double> mean, sd, median, min, max, range;
};

// Per-category statistics over entry frequencies: exact entries look up
// their word, wildcard entries take the total over all words with their
// prefix. SD is the sample deviation (0 for a single entry).
inline std::vector<CategoryFrequencyStats> category_frequency_stats(const Lexicon& lexicon,
                                                                    const UnigramTable& table) {
  std::vector<CategoryFrequencyStats> out;
  std::vector<std::vector<double>> frequencies(lexicon.categories().size());
  std::vector<std::size_t> missing(lexicon.categories().size(), 0);

  std::map<int, std::size_t> column_of;
  for (std::size_t c = 0; c < lexicon.categories().size(); ++c)
    column_of.emplace(lexicon.categories()[c].id, c);

  for (const auto& entry : lexicon.entries()) {
    const std::optional<double> freq =
        entry.wildcard ? table.prefix_sum(entry.pattern) : table.exact(entry.pattern);
    for (const int id : entry.category_ids) {
      const std::size_t column = column_of.at(id);
      if (freq)
        frequencies[column].push_back(*freq);
      else
        ++missing[column];
    }
  }

  for (std::size_t c = 0; c < lexicon.categories().size(); ++c) {
    CategoryFrequencyStats s;
    s.category = lexicon.categories()[c].name;
    s.terms = frequencies[c].size();
    s.missing = missing[c];
    if (!frequencies[c].empty()) {
      s.mean = stats::mean(frequencies[c]);
      s.sd = frequencies[c].size() > 1 ? stats::sample_sd(frequencies[c]) : 0.0;
      s.median = stats::median(frequencies[c]);
      const auto [mn, mx] = std::minmax_element(frequencies[c].begin(), frequencies[c].end());
      s.min = *mn;
      s.max = *mx;
      s.range = *mx - *mn;
    }
    out.push_back(std::move(s));
  }
  return out;
}

// --- serialization ----------------------------------------------------------

namespace detail {

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_rounded(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string format_metric(const std::optional<double>& v, bool rounded) {
  if (!v) return "NA";
  if (std::isinf(*v)) return "inf";
  return rounded ? format_rounded(*v) : format_full(*v);
}

inline nlohmann::json metric_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

}  // namespace detail

inline void write_metric_csv(std::span<const CellMetric> cells, std::ostream& out, bool rounded,
                             std::string_view label_header, std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << label_header << ",hit,tie,validity,signal_noise,profile_match\n";
  for (const auto& c : cells) {
    out << c.id << ',' << (c.hit ? 1 : 0) << ',' << (c.tie ? 1 : 0) << ','
        << detail::format_metric(c.validity, rounded) << ','
        << detail::format_metric(c.snr, rounded) << ','
        << detail::format_metric(c.profile_match, rounded) << '\n';
  }
}

inline nlohmann::json metrics_to_json(const MetricTable& table) {
  const auto cells_json = [](std::span<const CellMetric> cells) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cells) {
      arr.push_back({{"id", c.id},
                     {"hit", c.hit},
                     {"tie", c.tie},
                     {"validity", detail::metric_json(c.validity)},
                     {"signal_noise", detail::metric_json(c.snr)},
                     {"profile_match", detail::metric_json(c.profile_match)}});
    }
    return arr;
  };
  const auto summary_json = [](const MetricSummary& s) {
    return nlohmann::json{{"hit_rate", detail::metric_json(s.hit_rate)},
                          {"mean_validity", detail::metric_json(s.mean_validity)},
                          {"mean_signal_noise", detail::metric_json(s.mean_snr)},
                          {"mean_profile_match", detail::metric_json(s.mean_profile_match)}};
  };
  return nlohmann::json{{"concept", cells_json(table.rows)},
                        {"discriminant", cells_json(table.columns)},
                        {"row_totals", table.row_total},
                        {"column_totals", table.column_total},
                        {"summary",
                         {{"concept", summary_json(table.concept_summary)},
                          {"discriminant", summary_json(table.discriminant_summary)}}}};
}

inline nlohmann::json regression_to_json(const RegressionResult& r) {
  nlohmann::json predictors = nlohmann::json::array();
  for (const auto& p : r.predictors) {
    predictors.push_back({{"name", p.name},
                          {"b", p.b},
                          {"b_ci", {p.b_lo, p.b_hi}},
                          {"se_b", p.se_b},
                          {"beta", p.beta},
                          {"beta_ci", {p.beta_lo, p.beta_hi}},
                          {"se_beta", p.se_beta},
                          {"sr2", p.sr2},
                          {"r", p.r}});
  }
  return nlohmann::json{{"predictors", predictors},
                        {"intercept", r.intercept},
                        {"intercept_ci", {r.intercept_lo, r.intercept_hi}},
                        {"se_intercept", r.se_intercept},
                        {"r_squared", r.r_squared},
                        {"n", r.n},
                        {"df", r.df}};
}

}  // namespace valueprobe
