#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "valueprobe/corpus.hpp"
#include "valueprobe/errors.hpp"
#include "valueprobe/lexicon.hpp"
#include "valueprobe/probes.hpp"
#include "valueprobe/values.hpp"

namespace valueprobe {

// Prompt-class x value-category counts. Every row carries its congruent
// column; rows without one (unmapped fine types) are excluded before
// construction. Immutable once built.
struct CountMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<long long>> cells;
  std::vector<std::size_t> congruent_col;  // per row

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }

  std::size_t col_index(std::string_view name) const {
    for (std::size_t j = 0; j < col_labels.size(); ++j)
      if (col_labels[j] == name) return j;
    throw validation_error("unknown column: " + std::string(name));
  }

  // True when every row is labeled by its own column name (one row per value).
  bool aggregated() const {
    if (rows() != cols()) return false;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (row_labels[i] != col_labels[congruent_col[i]]) return false;
      if (!seen.insert(row_labels[i]).second) return false;
    }
    return true;
  }

  void validate() const {
    if (congruent_col.size() != rows())
      throw validation_error("count matrix: congruence map size mismatch");
    for (const auto& row : cells) {
      if (row.size() != cols()) throw validation_error("count matrix: ragged rows");
      for (const long long v : row)
        if (v < 0) throw validation_error("count matrix: negative cell");
    }
    for (const std::size_t c : congruent_col)
      if (c >= cols()) throw validation_error("count matrix: congruent column out of range");
  }
};

inline std::vector<long long> row_totals(const CountMatrix& m) {
  std::vector<long long> totals(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    totals[i] = std::accumulate(m.cells[i].begin(), m.cells[i].end(), 0LL);
  return totals;
}

inline std::vector<long long> column_totals(const CountMatrix& m) {
  std::vector<long long> totals(m.cols(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) totals[j] += m.cells[i][j];
  return totals;
}

// Sums per-document dictionary counts into one row per mapped fine type.
// Rows follow the value spec's fine-type order, columns its circle order.
// Failed
// generation records carry no text and are skipped.
inline CountMatrix build_count_matrix(const std::vector<ResponseRecord>& corpus,
                                      const Lexicon& lexicon, const ValueSpec& spec) {
  const std::set<std::string> lexicon_names = [&] {
    const auto names = lexicon.category_names();
    return std::set<std::string>(names.begin(), names.end());
  }();
  for (const auto& code : spec.circle_order)
    if (!lexicon_names.contains(code))
      throw validation_error("dictionary lacks category '" + code +
                             "' required by the value spec");

  CountMatrix m;
  m.col_labels = spec.circle_order;

  std::map<std::string, std::size_t> row_of;
  for (const auto& ft : spec.fine_types) {
    if (!ft.mapped()) continue;
    row_of.emplace(ft.id, m.row_labels.size());
    m.row_labels.push_back(ft.id);
    m.congruent_col.push_back(m.col_index(ft.parent_value));
  }
  m.cells.assign(m.rows(), std::vector<long long>(m.cols(), 0));

  std::set<std::string> unknown;
  for (const auto& record : corpus)
    if (!spec.find(record.fine_type_id)) unknown.insert(record.fine_type_id);
  if (!unknown.empty()) {
    std::string joined;
    for (const auto& id : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += "'" + id + "'";
    }
    throw validation_error("corpus references fine types missing from the value spec: " + joined);
  }

  for (const auto& record : corpus) {
    if (!record.ok) continue;
    const auto it = row_of.find(record.fine_type_id);
    if (it == row_of.end()) continue;  // unmapped fine type: probed but excluded
    const CategoryCounts counts = lexicon.score_text(record.cleaned_text);
    for (std::size_t j = 0; j < m.cols(); ++j)
      m.cells[it->second][j] += counts.at(m.col_labels[j]);
  }
  m.validate();
  return m;
}

// Sums rows sharing a congruent value into one row per value, ordered by
// the given circle order. The congruence map becomes the identity on names.
inline CountMatrix aggregate_matrix(const CountMatrix& m,
                                    const std::vector<std::string>& circle_order =
                                        circle_order_vector()) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto& parent = m.col_labels[m.congruent_col[i]];
    if (std::find(circle_order.begin(), circle_order.end(), parent) == circle_order.end())
      throw validation_error("row '" + m.row_labels[i] + "' has parent '" + parent +
                             "' outside the circle order");
  }

  CountMatrix agg;
  agg.col_labels = m.col_labels;

  for (const auto& code : circle_order) {
    std::vector<long long> sum(m.cols(), 0);
    bool any = false;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (m.col_labels[m.congruent_col[i]] != code) continue;
      any = true;
      for (std::size_t j = 0; j < m.cols(); ++j) sum[j] += m.cells[i][j];
    }
    if (!any) continue;
    agg.row_labels.push_back(code);
    agg.congruent_col.push_back(agg.col_index(code));
    agg.cells.push_back(std::move(sum));
  }
  agg.validate();
  return agg;
}

// --- CSV form -------------------------------------------------------------
//
// Header row of category codes with a leading row-label column; one integer
// row per prompt class. Lines starting with '#' are comments.

inline void write_matrix_csv(const CountMatrix& m, std::ostream& out,
                             std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "prompt";
  for (const auto& c : m.col_labels) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.row_labels[i];
    for (const long long v : m.cells[i]) out << ',' << v;
    out << '\n';
  }
}

inline void write_matrix_csv(const CountMatrix& m, const std::string& path,
                             std::string_view comment = {}) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write matrix file: " + path);
  write_matrix_csv(m, out, comment);
  if (!out) throw io_error("matrix write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(text::trim(line.substr(start)));
      break;
    }
    fields.emplace_back(text::trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

}  // namespace detail

inline CountMatrix load_matrix_csv(std::istream& in, const std::string& name = "<stream>") {
  CountMatrix m;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = detail::split_csv_line(trimmed);
    if (!header_seen) {
      if (fields.size() < 2)
        throw validation_error(name + " line " + std::to_string(line_number) +
                               ": header needs a label column and at least one category");
      for (std::size_t j = 1; j < fields.size(); ++j) {
        if (!is_value_code(fields[j]))
          throw validation_error(name + " line " + std::to_string(line_number) +
                                 ": unknown category code '" + fields[j] + "'");
        m.col_labels.push_back(fields[j]);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != m.cols() + 1)
      throw validation_error(name + " line " + std::to_string(line_number) + ": expected " +
                             std::to_string(m.cols() + 1) + " fields, got " +
                             std::to_string(fields.size()));
    const auto code = value_code_for_label(fields[0]);
    if (!code)
      throw validation_error(name + " line " + std::to_string(line_number) +
                             ": cannot derive a congruent value from row label '" + fields[0] +
                             "'");
    std::vector<long long> row;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(fields[j], &used);
        if (used != fields[j].size() || v < 0) throw std::invalid_argument("bad");
        row.push_back(v);
      } catch (const std::exception&) {
        throw validation_error(name + " line " + std::to_string(line_number) +
                               ": cell '" + fields[j] + "' is not a non-negative integer");
      }
    }
    m.row_labels.push_back(fields[0]);
    m.congruent_col.push_back(m.col_index(*code));
    m.cells.push_back(std::move(row));
  }
  if (!header_seen) throw validation_error(name + ": empty matrix file");
  m.validate();
  return m;
}

inline CountMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open matrix file: " + path);
  return load_matrix_csv(in, path);
}

}  // namespace valueprobe
