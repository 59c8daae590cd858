#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "valueprobe/corpus.hpp"
#include "valueprobe/count_matrix.hpp"
#include "valueprobe/errors.hpp"
#include "valueprobe/generator.hpp"
#include "valueprobe/lexicon.hpp"
#include "valueprobe/manifest.hpp"
#include "valueprobe/metrics.hpp"
#include "valueprobe/probes.hpp"
#include "valueprobe/report.hpp"
#include "valueprobe/structure.hpp"

namespace valueprobe::cli {

namespace detail {

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write file: " + path);
  out << content;
  if (!out) throw io_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string manifest_path(const std::string& out_prefix) {
  return out_prefix + ".manifest.json";
}

inline std::string manifest_name(const std::string& out_prefix) {
  return std::filesystem::path(manifest_path(out_prefix)).filename().string();
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("invalid JSON in '" + path + "': " + e.what());
  }
}

inline std::vector<std::string> circle_order_from(const std::string& spec_path) {
  if (spec_path.empty()) return circle_order_vector();
  return ValueSpec::load(spec_path).circle_order;
}

}  // namespace detail

// --- generate ----------------------------------------------------------------

struct GenerateOptions {
  std::string kind = "item";
  std::string spec_path;
  std::string config_path;
  std::string out_path;
  // flag overrides; negative/empty means "not set"
  int runs = -1;
  std::string model;
  int max_tokens = -1;
  double temperature = -1.0;
  double top_p = -1.0;
  std::string base_url;
};

inline int cmd_generate(const GenerateOptions& opt) {
  const std::string api_key = api_key_from_env();
  if (api_key.empty())
    throw config_error(std::string("authentication: ") + std::string(kApiKeyEnvVar) +
                       " is not set");

  const ValueSpec spec = ValueSpec::load(opt.spec_path);
  GenerationConfig config =
      opt.config_path.empty() ? GenerationConfig{} : GenerationConfig::load(opt.config_path);
  if (opt.runs > 0) config.runs_per_prompt = opt.runs;
  if (!opt.model.empty()) config.model = opt.model;
  if (opt.max_tokens > 0) config.max_tokens = opt.max_tokens;
  if (opt.temperature >= 0.0) config.temperature = opt.temperature;
  if (opt.top_p > 0.0) config.top_p = opt.top_p;
  if (!opt.base_url.empty()) config.base_url = opt.base_url;
  config.validate();

  const ProbeSet probes = build_probes(spec, probe_kind_from_string(opt.kind));

  std::vector<std::string> inputs = {opt.spec_path};
  if (!opt.config_path.empty()) inputs.push_back(opt.config_path);
  RunManifest manifest = RunManifest::begin("generate", std::move(inputs),
                                            config.to_json().dump());
  JsonlRecordSink sink(opt.out_path);
  const RunSummary summary = run_probes(probes, config, api_key, sink);

  manifest.outputs = {opt.out_path};
  manifest.finish_and_write(detail::manifest_path(opt.out_path));

  std::cout << "generate: " << summary.prompts << " prompts x " << config.runs_per_prompt
            << " runs -> " << (summary.succeeded + summary.failed) << " records ("
            << summary.succeeded << " ok, " << summary.failed << " failed)\n";
  if (summary.failed > 0)
    throw network_error(std::to_string(summary.failed) +
                        " generation(s) failed permanently; records are marked in the corpus");
  return 0;
}

// --- score -------------------------------------------------------------------

inline int cmd_score(const std::string& corpus_path, const std::string& dict_path,
                     const std::string& spec_path, const std::string& out_prefix) {
  const Lexicon lexicon = Lexicon::parse(detail::read_text_file(dict_path));
  const ValueSpec spec = ValueSpec::load(spec_path);
  const auto corpus = read_corpus(corpus_path);
  validate_corpus(corpus);

  RunManifest manifest =
      RunManifest::begin("score", {corpus_path, dict_path, spec_path});
  const std::string ref = "manifest: " + detail::manifest_name(out_prefix);

  const CountMatrix fine = build_count_matrix(corpus, lexicon, spec);
  const CountMatrix agg = aggregate_matrix(fine, spec.circle_order);

  const std::string fine_path = out_prefix + ".fine.csv";
  const std::string agg_path = out_prefix + ".agg.csv";
  write_matrix_csv(fine, fine_path, ref);
  write_matrix_csv(agg, agg_path, ref);

  manifest.outputs = {fine_path, agg_path};
  manifest.finish_and_write(detail::manifest_path(out_prefix));
  std::cout << "score: " << fine.rows() << "x" << fine.cols() << " fine matrix, "
            << agg.rows() << "x" << agg.cols() << " aggregated matrix\n";
  return 0;
}

// --- metrics -------------------------------------------------------------------

inline int cmd_metrics(const std::string& counts_path, const std::string& out_prefix,
                       const std::string& spec_path = {}) {
  const CountMatrix m = load_matrix_csv(counts_path);
  const auto circle = detail::circle_order_from(spec_path);
  const MetricTable table = compute_metric_table(m, circle);

  RunManifest manifest = RunManifest::begin("metrics", {counts_path});
  const std::string ref = "manifest: " + detail::manifest_name(out_prefix);

  const auto write_side = [&](std::span<const CellMetric> cells, const std::string& stem,
                              std::string_view label) {
    for (const bool rounded : {false, true}) {
      const std::string path =
          out_prefix + "." + stem + (rounded ? ".rounded.csv" : ".csv");
      std::ofstream out(path);
      if (!out) throw io_error("cannot write file: " + path);
      write_metric_csv(cells, out, rounded, label, ref);
      manifest.outputs.push_back(path);
    }
  };
  write_side(table.rows, "concept", "prompt");
  write_side(table.columns, "discriminant", "value");

  nlohmann::json j = metrics_to_json(table);
  j["manifest"] = detail::manifest_name(out_prefix);
  const std::string json_path = out_prefix + ".json";
  detail::write_text_file(json_path, j.dump(2) + "\n");
  manifest.outputs.push_back(json_path);

  manifest.finish_and_write(detail::manifest_path(out_prefix));
  std::cout << "metrics: " << table.rows.size() << " prompt classes, " << table.columns.size()
            << " value categories\n";
  return 0;
}

// --- structure -----------------------------------------------------------------

inline int cmd_structure(const std::string& counts_path, const std::string& out_prefix,
                         const std::string& correlation = "spearman",
                         const std::string& dissimilarity = "sqrt2",
                         const std::string& spec_path = {}) {
  const CountMatrix m = load_matrix_csv(counts_path);
  const auto circle = detail::circle_order_from(spec_path);

  CorrelationKind corr_kind;
  if (correlation == "spearman")
    corr_kind = CorrelationKind::spearman;
  else if (correlation == "pearson")
    corr_kind = CorrelationKind::pearson;
  else
    throw config_error("--correlation must be 'spearman' or 'pearson'");

  DissimilarityKind dis_kind;
  if (dissimilarity == "sqrt2")
    dis_kind = DissimilarityKind::sqrt2;
  else if (dissimilarity == "oneminus")
    dis_kind = DissimilarityKind::oneminus;
  else
    throw config_error("--dissimilarity must be 'sqrt2' or 'oneminus'");

  const StructureResult result = structure_report(m, circle, corr_kind, dis_kind);

  RunManifest manifest = RunManifest::begin("structure", {counts_path});
  const std::string ref = detail::manifest_name(out_prefix);

  nlohmann::json j = structure_to_json(result);
  j["manifest"] = ref;
  const std::string json_path = out_prefix + ".json";
  detail::write_text_file(json_path, j.dump(2) + "\n");

  std::vector<std::pair<double, double>> rotated, target;
  for (Eigen::Index i = 0; i < result.fit.rotated.rows(); ++i) {
    rotated.emplace_back(result.fit.rotated(i, 0), result.fit.rotated(i, 1));
    target.emplace_back(result.target(i, 0), result.target(i, 1));
  }
  const std::string svg_path = out_prefix + ".svg";
  detail::write_text_file(
      svg_path, structure_scatter_svg(result.configuration.labels, rotated, target, ref));

  manifest.outputs = {json_path, svg_path};
  manifest.finish_and_write(detail::manifest_path(out_prefix));
  std::cout << "structure: stress " << result.configuration.stress << ", phi "
            << result.fit.phi_overall << ", alienation " << result.fit.alienation << "\n";
  return 0;
}

// --- baseline: dictionary scan of the instrument itself -------------------------

inline int cmd_baseline_instrument(const std::string& spec_path, const std::string& dict_path,
                                   const std::string& out_prefix) {
  const ValueSpec spec = ValueSpec::load(spec_path);
  const Lexicon lexicon = Lexicon::parse(detail::read_text_file(dict_path));
  for (const auto& code : spec.circle_order)
    if (!lexicon.has_category(code))
      throw validation_error("dictionary lacks category '" + code + "'");

  RunManifest manifest = RunManifest::begin("baseline-instrument", {spec_path, dict_path});
  const std::string ref = "manifest: " + detail::manifest_name(out_prefix);

  CountMatrix counts;
  counts.col_labels = spec.circle_order;

  nlohmann::json fine_json = nlohmann::json::array();
  for (const auto& ft : spec.fine_types) {
    nlohmann::json items = nlohmann::json::array();
    nlohmann::json mismatches = nlohmann::json::array();
    std::vector<long long> row(counts.cols(), 0);
    for (std::size_t item_index = 0; item_index < ft.item_texts.size(); ++item_index) {
      nlohmann::json matches = nlohmann::json::array();
      for (const auto& token : tokenize(ft.item_texts[item_index])) {
        std::set<std::string> categories;
        for (const std::size_t e : lexicon.matching_entries(token))
          for (const int id : lexicon.entries()[e].category_ids)
            for (const auto& cat : lexicon.categories())
              if (cat.id == id) categories.insert(cat.name);
        if (categories.empty()) continue;
        for (const auto& name : categories) {
          for (std::size_t j = 0; j < counts.cols(); ++j)
            if (counts.col_labels[j] == name) ++row[j];
        }
        matches.push_back({{"token", token}, {"categories", categories}});
        if (ft.mapped() && !categories.contains(ft.parent_value))
          mismatches.push_back({{"token", token}, {"categories", categories}});
      }
      items.push_back({{"index", item_index}, {"matches", matches}});
    }

    nlohmann::json row_counts;
    for (std::size_t j = 0; j < counts.cols(); ++j) row_counts[counts.col_labels[j]] = row[j];

    nlohmann::json entry{{"id", ft.id},
                         {"parent_value", ft.parent_value},
                         {"items", items},
                         {"counts", row_counts},
                         {"mismatches", mismatches}};
    if (ft.mapped()) {
      const long long best = *std::max_element(row.begin(), row.end());
      std::size_t congruent = 0;
      for (std::size_t j = 0; j < counts.cols(); ++j)
        if (counts.col_labels[j] == ft.parent_value) congruent = j;
      bool other_max = false;
      for (std::size_t j = 0; j < counts.cols(); ++j)
        if (j != congruent && row[j] == best) other_max = true;
      entry["hit"] = best > 0 && row[congruent] == best && !other_max;
      entry["tie"] = best > 0 && row[congruent] == best && other_max;
      counts.row_labels.push_back(ft.id);
      counts.congruent_col.push_back(congruent);
      counts.cells.push_back(row);
    }
    fine_json.push_back(std::move(entry));
  }
  counts.validate();

  nlohmann::json j{{"fine_types", fine_json},
                   {"manifest", detail::manifest_name(out_prefix)}};
  if (counts.rows() > 0) {
    const CountMatrix agg = aggregate_matrix(counts, spec.circle_order);
    nlohmann::json values = nlohmann::json::array();
    const auto hits = row_hits(agg);
    for (std::size_t i = 0; i < agg.rows(); ++i) {
      nlohmann::json row_counts;
      for (std::size_t c = 0; c < agg.cols(); ++c) row_counts[agg.col_labels[c]] = agg.cells[i][c];
      const bool any = *std::max_element(agg.cells[i].begin(), agg.cells[i].end()) > 0;
      values.push_back({{"value", agg.row_labels[i]},
                        {"counts", row_counts},
                        {"hit", any && hits[i].hit},
                        {"tie", any && hits[i].tie}});
    }
    j["values"] = values;
  }

  const std::string json_path = out_prefix + ".json";
  detail::write_text_file(json_path, j.dump(2) + "\n");
  const std::string csv_path = out_prefix + ".csv";
  write_matrix_csv(counts, csv_path, ref);

  manifest.outputs = {json_path, csv_path};
  manifest.finish_and_write(detail::manifest_path(out_prefix));
  std::cout << "baseline-instrument: " << counts.rows() << " mapped fine types scanned\n";
  return 0;
}

// --- baseline: English word frequencies -----------------------------------------

inline int cmd_baseline_wordfreq(const std::string& dict_path, const std::string& unigram_path,
                                 const std::string& out_prefix) {
  const Lexicon lexicon = Lexicon::parse(detail::read_text_file(dict_path));
  const UnigramTable table = UnigramTable::load_csv(unigram_path);
  const auto stats_rows = category_frequency_stats(lexicon, table);

  RunManifest manifest = RunManifest::begin("baseline-wordfreq", {dict_path, unigram_path});
  const std::string ref = "manifest: " + detail::manifest_name(out_prefix);

  const auto write_csv = [&](bool rounded) {
    const std::string path = out_prefix + (rounded ? ".rounded.csv" : ".csv");
    std::ofstream out(path);
    if (!out) throw io_error("cannot write file: " + path);
    out << "# " << ref << '\n';
    out << "value,terms,missing,mean,sd,median,min,max,range\n";
    for (const auto& s : stats_rows) {
      out << s.category << ',' << s.terms << ',' << s.missing << ','
          << valueprobe::detail::format_metric(s.mean, rounded) << ','
          << valueprobe::detail::format_metric(s.sd, rounded) << ','
          << valueprobe::detail::format_metric(s.median, rounded) << ','
          << valueprobe::detail::format_metric(s.min, rounded) << ','
          << valueprobe::detail::format_metric(s.max, rounded) << ','
          << valueprobe::detail::format_metric(s.range, rounded) << '\n';
    }
    manifest.outputs.push_back(path);
  };
  write_csv(false);
  write_csv(true);

  for (const auto& s : stats_rows)
    if (s.missing > 0)
      std::cout << "baseline-wordfreq: category " << s.category << " has " << s.missing
                << " entries with no match in the unigram table\n";

  manifest.finish_and_write(detail::manifest_path(out_prefix));
  std::cout << "baseline-wordfreq: " << stats_rows.size() << " categories\n";
  return 0;
}

// --- report ---------------------------------------------------------------------

inline int cmd_report(const std::vector<std::string>& metrics_paths,
                      const std::string& structure_path, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> inputs = metrics_paths;
  if (!structure_path.empty()) inputs.push_back(structure_path);
  RunManifest manifest = RunManifest::begin("report", inputs);
  const std::string manifest_file = (std::filesystem::path(out_dir) / "report.manifest.json").string();
  const std::string ref = "report.manifest.json";

  std::ostringstream summary;

  for (const auto& path : metrics_paths) {
    const nlohmann::json j = detail::load_json_file(path);
    std::vector<std::string> labels;
    std::vector<long long> totals;
    try {
      for (const auto& col : j.at("discriminant")) labels.push_back(col.at("id").get<std::string>());
      for (const auto& v : j.at("column_totals")) totals.push_back(v.get<long long>());
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("metrics JSON '" + path + "': " + e.what());
    }
    if (labels.size() != totals.size())
      throw validation_error("metrics JSON '" + path + "': column totals do not match categories");

    const std::string stem = std::filesystem::path(path).stem().string();
    const std::string svg_path =
        (std::filesystem::path(out_dir) / ("counts_" + stem + ".svg")).string();
    detail::write_text_file(svg_path,
                            bar_chart_svg("Dictionary counts: " + stem, labels, totals, ref));
    manifest.outputs.push_back(svg_path);

    summary << stem << ":\n";
    const auto& s = j.at("summary");
    summary << "  concept hit rate " << s.at("concept").at("hit_rate").dump() << ", mean validity "
            << s.at("concept").at("mean_validity").dump() << "\n";
    summary << "  discriminant hit rate " << s.at("discriminant").at("hit_rate").dump()
            << ", mean validity " << s.at("discriminant").at("mean_validity").dump() << "\n";
  }

  if (!structure_path.empty()) {
    const nlohmann::json j = detail::load_json_file(structure_path);
    std::vector<std::string> labels;
    std::vector<std::pair<double, double>> rotated, target;
    try {
      for (const auto& l : j.at("labels")) labels.push_back(l.get<std::string>());
      for (const auto& p : j.at("rotated")) rotated.emplace_back(p.at(0), p.at(1));
      for (const auto& p : j.at("target")) target.emplace_back(p.at(0), p.at(1));
      summary << "structure: phi " << j.at("phi_overall").dump() << ", alienation "
              << j.at("alienation").dump() << ", stress " << j.at("stress").dump() << "\n";
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("structure JSON '" + structure_path + "': " + e.what());
    }
    const std::string svg_path = (std::filesystem::path(out_dir) / "structure.svg").string();
    detail::write_text_file(svg_path, structure_scatter_svg(labels, rotated, target, ref));
    manifest.outputs.push_back(svg_path);
  }

  const std::string summary_path = (std::filesystem::path(out_dir) / "summary.txt").string();
  detail::write_text_file(summary_path, summary.str());
  manifest.outputs.push_back(summary_path);

  manifest.finish_and_write(manifest_file);
  std::cout << "report: " << manifest.outputs.size() << " artifacts in " << out_dir << "\n";
  return 0;
}

// --- entry point ------------------------------------------------------------------

inline int run(std::vector<std::string> args) {
  CLI::App app{"valueprobe: audit chat-model text generation for value bias"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "probe a chat-completions endpoint");
  generate->add_option("--kind", gen.kind, "probe kind: item|definition|name")->required();
  generate->add_option("--spec", gen.spec_path, "value spec JSON")->required();
  generate->add_option("--config", gen.config_path, "generation config JSON");
  generate->add_option("--out", gen.out_path, "corpus JSONL output")->required();
  generate->add_option("--runs", gen.runs, "runs per prompt");
  generate->add_option("--model", gen.model, "model name");
  generate->add_option("--max-tokens", gen.max_tokens, "max completion tokens");
  generate->add_option("--temperature", gen.temperature, "sampling temperature");
  generate->add_option("--top-p", gen.top_p, "nucleus sampling parameter");
  generate->add_option("--base-url", gen.base_url, "endpoint origin, e.g. http://127.0.0.1:8080");

  std::string corpus_path, dict_path, spec_path, out_path, counts_path;
  auto* score = app.add_subcommand("score", "turn a corpus into count matrices");
  score->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  score->add_option("--dict", dict_path, "value dictionary")->required();
  score->add_option("--spec", spec_path, "value spec JSON")->required();
  score->add_option("--out", out_path, "output prefix")->required();

  std::string metrics_counts, metrics_out, metrics_spec;
  auto* metrics = app.add_subcommand("metrics", "compute the validity battery from a matrix");
  metrics->add_option("--counts", metrics_counts, "count matrix CSV")->required();
  metrics->add_option("--out", metrics_out, "output prefix")->required();
  metrics->add_option("--spec", metrics_spec, "value spec JSON (for a custom circle order)");

  std::string structure_counts, structure_out, structure_corr = "spearman",
              structure_dis = "sqrt2", structure_spec;
  auto* structure = app.add_subcommand("structure", "MDS + procrustes structural replication");
  structure->add_option("--counts", structure_counts, "count matrix CSV")->required();
  structure->add_option("--out", structure_out, "output prefix")->required();
  structure->add_option("--correlation", structure_corr, "spearman|pearson");
  structure->add_option("--dissimilarity", structure_dis, "sqrt2|oneminus");
  structure->add_option("--spec", structure_spec, "value spec JSON (for a custom circle order)");

  std::string bi_spec, bi_dict, bi_out;
  auto* baseline_instrument =
      app.add_subcommand("baseline-instrument", "dictionary scan of the probe texts themselves");
  baseline_instrument->add_option("--spec", bi_spec, "value spec JSON")->required();
  baseline_instrument->add_option("--dict", bi_dict, "value dictionary")->required();
  baseline_instrument->add_option("--out", bi_out, "output prefix")->required();

  std::string bw_dict, bw_unigrams, bw_out;
  auto* baseline_wordfreq =
      app.add_subcommand("baseline-wordfreq", "dictionary term frequencies in English");
  baseline_wordfreq->add_option("--dict", bw_dict, "value dictionary")->required();
  baseline_wordfreq->add_option("--unigrams", bw_unigrams, "word,count CSV")->required();
  baseline_wordfreq->add_option("--out", bw_out, "output prefix")->required();

  std::vector<std::string> report_metrics;
  std::string report_structure, report_out;
  auto* report = app.add_subcommand("report", "emit SVG charts and a text summary");
  report->add_option("--metrics", report_metrics, "metrics JSON (repeatable)");
  report->add_option("--structure", report_structure, "structure JSON");
  report->add_option("--out", report_out, "output directory")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::config);
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (score->parsed()) return cmd_score(corpus_path, dict_path, spec_path, out_path);
    if (metrics->parsed()) return cmd_metrics(metrics_counts, metrics_out, metrics_spec);
    if (structure->parsed())
      return cmd_structure(structure_counts, structure_out, structure_corr, structure_dis,
                           structure_spec);
    if (baseline_instrument->parsed())
      return cmd_baseline_instrument(bi_spec, bi_dict, bi_out);
    if (baseline_wordfreq->parsed())
      return cmd_baseline_wordfreq(bw_dict, bw_unigrams, bw_out);
    if (report->parsed()) return cmd_report(report_metrics, report_structure, report_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace valueprobe::cli
