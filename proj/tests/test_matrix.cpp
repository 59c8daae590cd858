#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "support/paths.hpp"
#include "valueprobe/count_matrix.hpp"

using valueprobe::aggregate_matrix;
using valueprobe::build_count_matrix;
using valueprobe::column_totals;
using valueprobe::CountMatrix;
using valueprobe::Error;
using valueprobe::Lexicon;
using valueprobe::load_matrix_csv;
using valueprobe::ProbeKind;
using valueprobe::ResponseRecord;
using valueprobe::row_totals;
using valueprobe::ValueSpec;

namespace {

std::string ten_category_dictionary() {
  std::ostringstream s;
  s << "%\n";
  const auto order = valueprobe::circle_order_vector();
  for (std::size_t i = 0; i < order.size(); ++i) s << i + 1 << '\t' << order[i] << '\n';
  s << "%\n";
  s << "alarm\t1\nsecur*\t1\nobey\t2\ntradition\t3\ncaring\t4\njustice\t5\n"
       "freedom\t6\nthrill\t7\npleasure\t8\nsuccess\t9\npower\t10\n";
  return s.str();
}

ValueSpec two_type_spec() {
  ValueSpec spec;
  spec.circle_order = valueprobe::circle_order_vector();
  spec.fine_types.push_back({"Security—Personal", "SE", {"item"}, "def", "Security—Personal"});
  spec.fine_types.push_back({"Hedonism", "HE", {"item"}, "def", "Hedonism"});
  spec.fine_types.push_back({"Face", "unmapped", {"item"}, "def", "Face"});
  return spec;
}

ResponseRecord record(const std::string& fine_type, const std::string& text) {
  ResponseRecord r;
  r.kind = ProbeKind::item;
  r.fine_type_id = fine_type;
  r.prompt_text = "Elaborate on: item";
  r.cleaned_text = text;
  r.raw_text = text;
  return r;
}

CountMatrix random_fine_matrix(std::mt19937& rng) {
  const auto order = valueprobe::circle_order_vector();
  CountMatrix m;
  m.col_labels = order;
  std::uniform_int_distribution<long long> cell(0, 300);
  std::uniform_int_distribution<std::size_t> parent(0, order.size() - 1);
  for (int i = 0; i < 17; ++i) {
    const std::size_t p = parent(rng);
    m.row_labels.push_back(order[p] + "\xE2\x80\x94r" + std::to_string(i));
    m.congruent_col.push_back(p);
    std::vector<long long> row(order.size());
    for (auto& v : row) v = cell(rng);
    m.cells.push_back(std::move(row));
  }
  return m;
}

}  // namespace

TEST_SUITE("matrix.build") {
  TEST_CASE("hand-planted dictionary words produce hand-computed cells") {
    const Lexicon lex = Lexicon::parse(ten_category_dictionary());
    const ValueSpec spec = two_type_spec();
    const std::vector<ResponseRecord> corpus = {
        record("Security—Personal", "the alarm rang twice; security secured the site"),
        record("Security—Personal", "freedom from alarm"),
        record("Hedonism", "pleasure pleasure success"),
        record("Face", "alarm alarm alarm"),  // unmapped: scored nowhere
    };
    const CountMatrix m = build_count_matrix(corpus, lex, spec);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 10);
    CHECK(m.row_labels[0] == "Security—Personal");
    // alarm + secur*(security, secured) in record 1, alarm in record 2
    CHECK(m.cells[0][m.col_index("SE")] == 4);
    CHECK(m.cells[0][m.col_index("SD")] == 1);  // freedom
    CHECK(m.cells[1][m.col_index("HE")] == 2);
    CHECK(m.cells[1][m.col_index("AC")] == 1);
    CHECK(m.cells[1][m.col_index("SE")] == 0);
  }

  TEST_CASE("empty corpus gives an all-zero matrix with spec-ordered rows") {
    const Lexicon lex = Lexicon::parse(ten_category_dictionary());
    const ValueSpec spec = ValueSpec::load(testpaths::data("valuespec.example.json"));
    const CountMatrix m = build_count_matrix({}, lex, spec);
    CHECK(m.rows() == 17);
    CHECK(m.cols() == 10);
    for (const auto& row : m.cells)
      for (const long long v : row) CHECK(v == 0);
  }

  TEST_CASE("unknown fine types are reported together") {
    const Lexicon lex = Lexicon::parse(ten_category_dictionary());
    const ValueSpec spec = two_type_spec();
    const std::vector<ResponseRecord> corpus = {record("Mystery", "x"),
                                                record("Enigma", "y")};
    CHECK_THROWS_WITH_AS(build_count_matrix(corpus, lex, spec),
                         doctest::Contains("'Enigma', 'Mystery'"), Error);
  }

  TEST_CASE("dictionary must cover the ten categories") {
    const Lexicon lex = Lexicon::parse("%\n1\tSE\n%\nalarm\t1\n");
    CHECK_THROWS_WITH_AS(build_count_matrix({}, lex, two_type_spec()),
                         doctest::Contains("lacks category"), Error);
  }

  TEST_CASE("record order does not change the matrix") {
    const Lexicon lex = Lexicon::parse(ten_category_dictionary());
    const ValueSpec spec = two_type_spec();
    std::vector<ResponseRecord> corpus = {
        record("Security—Personal", "alarm alarm"),
        record("Hedonism", "pleasure"),
        record("Security—Personal", "security and justice"),
        record("Hedonism", "success and power"),
    };
    const CountMatrix a = build_count_matrix(corpus, lex, spec);
    std::reverse(corpus.begin(), corpus.end());
    const CountMatrix b = build_count_matrix(corpus, lex, spec);
    CHECK(a.cells == b.cells);
    CHECK(a.row_labels == b.row_labels);
  }

  TEST_CASE("failed records are skipped") {
    const Lexicon lex = Lexicon::parse(ten_category_dictionary());
    const ValueSpec spec = two_type_spec();
    ResponseRecord bad = record("Hedonism", "pleasure pleasure");
    bad.ok = false;
    const CountMatrix m = build_count_matrix({bad}, lex, spec);
    CHECK(m.cells[1][m.col_index("HE")] == 0);
  }
}

TEST_SUITE("matrix.aggregate") {
  TEST_CASE("published fine rows aggregate to the published value rows") {
    const CountMatrix fine = load_matrix_csv(testpaths::fixture("table_s2_fine.csv"));
    const CountMatrix agg = aggregate_matrix(fine);
    const CountMatrix published = load_matrix_csv(testpaths::fixture("table_s2_aggregated.csv"));
    REQUIRE(agg.rows() == 10);
    for (std::size_t i = 0; i < agg.rows(); ++i) {
      const std::size_t p = [&] {
        for (std::size_t k = 0; k < published.rows(); ++k)
          if (published.row_labels[k] == agg.row_labels[i]) return k;
        FAIL("missing row ", agg.row_labels[i]);
        return std::size_t{0};
      }();
      CAPTURE(agg.row_labels[i]);
      CHECK(agg.cells[i] == published.cells[p]);
    }
    const std::size_t se = 0;
    REQUIRE(agg.row_labels[se] == "SE");
    CHECK(agg.cells[se] ==
          std::vector<long long>{429, 12, 119, 78, 149, 94, 35, 29, 96, 102});
  }

  TEST_CASE("single row per parent aggregates to itself") {
    // rows come back in circle order, cells untouched
    const CountMatrix agg = load_matrix_csv(testpaths::fixture("table_s2_aggregated.csv"));
    const CountMatrix again = aggregate_matrix(agg);
    REQUIRE(again.rows() == agg.rows());
    for (std::size_t i = 0; i < again.rows(); ++i) {
      for (std::size_t k = 0; k < agg.rows(); ++k)
        if (agg.row_labels[k] == again.row_labels[i]) CHECK(again.cells[i] == agg.cells[k]);
    }
    // an input already in circle order is returned unchanged
    const CountMatrix fixed = aggregate_matrix(again);
    CHECK(fixed.row_labels == again.row_labels);
    CHECK(fixed.cells == again.cells);
  }

  TEST_CASE("a parent outside the circle order is rejected") {
    CountMatrix m;
    m.col_labels = {"SE", "CO"};
    m.row_labels = {"SE"};
    m.congruent_col = {0};
    m.cells = {{1, 2}};
    CHECK_THROWS_WITH_AS(aggregate_matrix(m, {"CO"}), doctest::Contains("circle order"), Error);
  }

  TEST_CASE("random matrices match a group-by-sum oracle") {
    std::mt19937 rng(101);
    for (int round = 0; round < 30; ++round) {
      const CountMatrix m = random_fine_matrix(rng);
      const CountMatrix agg = aggregate_matrix(m);

      // oracle: sum rows per congruent column label
      std::map<std::string, std::vector<long long>> sums;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        auto& acc = sums[m.col_labels[m.congruent_col[i]]];
        if (acc.empty()) acc.assign(m.cols(), 0);
        for (std::size_t j = 0; j < m.cols(); ++j) acc[j] += m.cells[i][j];
      }
      REQUIRE(agg.rows() == sums.size());
      for (std::size_t i = 0; i < agg.rows(); ++i) {
        CAPTURE(round);
        CHECK(agg.cells[i] == sums.at(agg.row_labels[i]));
      }

      // total mass is preserved
      long long fine_total = 0, agg_total = 0;
      for (const auto& row : m.cells)
        for (const long long v : row) fine_total += v;
      for (const auto& row : agg.cells)
        for (const long long v : row) agg_total += v;
      CHECK(fine_total == agg_total);

      // aggregated rows follow circle order
      const auto order = valueprobe::circle_order_vector();
      std::vector<std::string> expected_order;
      for (const auto& code : order)
        if (sums.contains(code)) expected_order.push_back(code);
      CHECK(agg.row_labels == expected_order);
    }
  }
}

TEST_SUITE("matrix.totals") {
  TEST_CASE("published row and column totals") {
    const CountMatrix s2 = load_matrix_csv(testpaths::fixture("table_s2_fine.csv"));
    CHECK(row_totals(s2)[0] == 624);  // Security—Personal
    const CountMatrix s3 = load_matrix_csv(testpaths::fixture("table_s3_fine.csv"));
    CHECK(column_totals(s3)[s3.col_index("SE")] == 341);
  }

  TEST_CASE("zero matrix has zero totals") {
    CountMatrix m;
    m.col_labels = valueprobe::circle_order_vector();
    m.row_labels = {"SE"};
    m.congruent_col = {0};
    m.cells = {std::vector<long long>(10, 0)};
    CHECK(row_totals(m) == std::vector<long long>{0});
    CHECK(column_totals(m) == std::vector<long long>(10, 0));
  }
}

TEST_SUITE("matrix.csv") {
  TEST_CASE("write then load round-trips, comment line ignored") {
    std::mt19937 rng(55);
    const CountMatrix m = random_fine_matrix(rng);
    std::ostringstream out;
    write_matrix_csv(m, out, "manifest: test.manifest.json");
    std::istringstream in(out.str());
    const CountMatrix back = load_matrix_csv(in, "roundtrip");
    CHECK(back.col_labels == m.col_labels);
    CHECK(back.row_labels == m.row_labels);
    CHECK(back.cells == m.cells);
    CHECK(back.congruent_col == m.congruent_col);
  }

  TEST_CASE("row labels resolve congruence from value names") {
    std::istringstream in(
        "prompt,SE,CO\n"
        "Security—Personal,3,1\n"
        "SE—Societal,2,0\n"
        "Conformity,0,5\n");
    const CountMatrix m = load_matrix_csv(in, "labels");
    CHECK(m.congruent_col == std::vector<std::size_t>{0, 0, 1});
  }

  TEST_CASE("malformed files name the line") {
    std::istringstream missing("prompt,SE\nSecurity—Personal\n");
    CHECK_THROWS_WITH_AS(load_matrix_csv(missing, "bad"), doctest::Contains("line 2"), Error);
    std::istringstream alpha("prompt,SE\nSecurity—Personal,xyz\n");
    CHECK_THROWS_WITH_AS(load_matrix_csv(alpha, "bad"), doctest::Contains("not a non-negative"),
                         Error);
    std::istringstream label("prompt,SE\nWhatever,3\n");
    CHECK_THROWS_WITH_AS(load_matrix_csv(label, "bad"), doctest::Contains("row label"), Error);
    std::istringstream header("prompt,XX\nSE,3\n");
    CHECK_THROWS_WITH_AS(load_matrix_csv(header, "bad"), doctest::Contains("unknown category"),
                         Error);
  }
}
