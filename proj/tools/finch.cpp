// finch: corpus validation, benchmarking, and evaluation for text-to-SQL.
// Data goes to files or stdout; diagnostics go to stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finch/finch.hpp"
#include "finch/jsonl.hpp"

namespace {

finch::MetricConfig load_config(const std::string& path) {
  if (path.empty()) return finch::MetricConfig::defaults();
  nlohmann::json doc = nlohmann::json::parse(finch::read_file(path));
  return finch::MetricConfig::from_json(doc);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  finch::write_file(path, text);
}

int cmd_validate(const std::string& corpus_path, const std::string& db_root, int timeout_ms,
                 int workers, const std::string& clean_out, const std::string& anomalies_out) {
  finch::Corpus corpus = finch::ingest({corpus_path}, db_root);
  if (corpus.duplicates_dropped > 0)
    std::cerr << "dropped " << corpus.duplicates_dropped << " duplicate pair(s)\n";
  for (const auto& db_id : corpus.missing_dbs)
    std::cerr << "missing database file for db_id '" << db_id << "'\n";
  finch::ValidationResult result =
      finch::validate_corpus(corpus, db_root, timeout_ms, workers);
  if (anomalies_out.empty() || anomalies_out == "-") {
    for (const auto& a : result.anomalies) std::cout << finch::anomaly_to_json(a).dump() << "\n";
  } else {
    finch::JsonlWriter out(anomalies_out);
    for (const auto& a : result.anomalies) out.write(finch::anomaly_to_json(a));
  }
  if (!clean_out.empty()) finch::write_corpus(result.clean, clean_out);
  std::cerr << "validated " << corpus.pairs.size() << " pair(s): " << result.clean.pairs.size()
            << " clean, " << result.anomalies.size() << " anomalous\n";
  return 0;
}

int cmd_annotate(const std::string& corpus_path, const std::string& out_path) {
  finch::Corpus corpus = finch::ingest({corpus_path});
  size_t flagged = finch::annotate_corpus(corpus);
  if (out_path.empty() || out_path == "-") {
    for (const auto& p : corpus.pairs) std::cout << finch::pair_to_json(p).dump() << "\n";
  } else {
    finch::write_corpus(corpus, out_path);
  }
  std::cerr << "annotated " << corpus.pairs.size() << " pair(s), " << flagged
            << " left unlabeled\n";
  return 0;
}

int cmd_stats(const std::string& corpus_path, const std::string& db_root,
              const std::string& out_path) {
  finch::Corpus corpus = finch::ingest({corpus_path}, db_root);
  finch::CorpusStats stats = finch::corpus_stats(corpus, db_root);
  for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
  write_text(out_path, finch::stats_to_json(stats).dump(2) + "\n");
  return 0;
}

int cmd_bench(const std::string& corpus_path, const std::string& db_root,
              const finch::ModelEndpoint& endpoint, const std::string& out_path,
              int concurrency) {
  finch::Corpus corpus = finch::ingest({corpus_path}, db_root);
  finch::BenchResult result =
      finch::run_benchmark(corpus, db_root, endpoint, out_path, concurrency, &std::cerr);
  std::cerr << "bench: " << result.requested << " requested, " << result.skipped
            << " already done, " << result.failed << " failed\n";
  return 0;
}

int cmd_eval(const std::string& corpus_path, const std::string& predictions_path,
             const std::string& db_root, const std::string& config_path,
             const std::string& records_out, const std::string& report_out, int workers,
             int timeout_ms) {
  finch::MetricConfig cfg = load_config(config_path);
  finch::Corpus corpus = finch::ingest({corpus_path}, db_root);
  finch::PredictionMap predictions;
  for (const auto& p : finch::read_predictions(predictions_path))
    predictions[p.pair_id] = p.sql;
  std::vector<finch::EvaluationRecord> records =
      finch::evaluate_corpus(corpus, predictions, db_root, cfg, workers, timeout_ms, &std::cerr);
  {
    finch::JsonlWriter out(records_out);
    for (const auto& r : records) out.write(finch::record_to_json(r));
  }
  finch::AggregateReport report = finch::aggregate(records, &corpus);
  write_text(report_out, finch::render_json(report));
  std::cerr << "evaluated " << records.size() << " of " << corpus.pairs.size() << " pair(s)\n";
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& format,
               const std::string& out_path) {
  std::vector<finch::EvaluationRecord> records;
  finch::for_each_jsonl_line(records_path, [&](size_t, const nlohmann::json& j) {
    records.push_back(finch::record_from_json(j));
  });
  finch::AggregateReport report = finch::aggregate(records);
  if (format == "json") {
    write_text(out_path, finch::render_json(report));
  } else if (format == "md") {
    write_text(out_path, finch::render_markdown(report));
  } else if (format == "csv") {
    auto sections = finch::render_csv(report);
    if (out_path.empty() || out_path == "-") {
      for (const auto& [name, body] : sections) std::cout << "# " << name << "\n" << body << "\n";
    } else {
      std::filesystem::path base(out_path);
      std::filesystem::path stem = base.parent_path() / base.stem();
      for (const auto& [name, body] : sections)
        finch::write_file(stem.string() + "." + name + ".csv", body);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-SQL corpus toolkit: validation, benchmarking, FINCH evaluation"};
  app.require_subcommand(1);

  std::string corpus_path, db_root, out_path, config_path;
  int timeout_ms = 30000;
  int workers = 8;

  auto* validate = app.add_subcommand("validate", "Execute every gold query and report anomalies");
  std::string clean_out, anomalies_out;
  validate->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  validate->add_option("--db-root", db_root, "database root directory")->required();
  validate->add_option("--timeout-ms", timeout_ms, "per-query timeout");
  validate->add_option("--workers", workers, "parallel workers");
  validate->add_option("--clean-out", clean_out, "write the clean corpus JSONL here");
  validate->add_option("--anomalies-out", anomalies_out, "write anomalies JSONL here (default stdout)");

  auto* annotate = app.add_subcommand("annotate", "Fill in missing difficulty labels");
  annotate->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  annotate->add_option("--out", out_path, "output corpus JSONL (default stdout)");

  auto* stats = app.add_subcommand("stats", "Corpus statistics as JSON");
  stats->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  stats->add_option("--db-root", db_root, "database root directory")->required();
  stats->add_option("--out", out_path, "output path (default stdout)");

  auto* bench = app.add_subcommand("bench", "Collect model predictions for every pair");
  finch::ModelEndpoint endpoint;
  int concurrency = 4;
  bench->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  bench->add_option("--db-root", db_root, "database root directory")->required();
  bench->add_option("--endpoint", endpoint.base_url, "chat-completions endpoint URL")->required();
  bench->add_option("--model", endpoint.model_name, "model name")->required();
  bench->add_option("--concurrency", concurrency, "in-flight requests");
  bench->add_option("--out", out_path, "predictions JSONL (resumable)")->required();
  bench->add_option("--api-key-env", endpoint.api_key_env, "env var holding the API key");
  bench->add_option("--timeout-ms", endpoint.timeout_ms, "per-request timeout");
  bench->add_option("--max-attempts", endpoint.max_attempts, "attempts per request");
  bench->add_option("--backoff-ms", endpoint.backoff_ms, "base retry backoff");
  bench->add_option("--max-tokens", endpoint.max_tokens, "completion token cap");
  bench->add_option("--temperature", endpoint.temperature, "sampling temperature");

  auto* eval = app.add_subcommand("eval", "Score predictions against the corpus");
  std::string predictions_path, records_out = "records.jsonl", report_out;
  eval->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  eval->add_option("--predictions", predictions_path, "predictions JSONL")->required();
  eval->add_option("--db-root", db_root, "database root directory")->required();
  eval->add_option("--config", config_path, "metric config JSON");
  eval->add_option("--records", records_out, "per-pair records JSONL output");
  eval->add_option("--report", report_out, "aggregate report JSON output (default stdout)");
  eval->add_option("--workers", workers, "parallel workers");
  eval->add_option("--timeout-ms", timeout_ms, "per-query timeout");

  auto* report = app.add_subcommand("report", "Render an aggregate report from records");
  std::string records_path, format = "json";
  report->add_option("--records", records_path, "records JSONL")->required();
  report->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "csv", "md"}));
  report->add_option("--out", out_path, "output path (csv writes <out>.<section>.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed())
      return cmd_validate(corpus_path, db_root, timeout_ms, workers, clean_out, anomalies_out);
    if (annotate->parsed()) return cmd_annotate(corpus_path, out_path);
    if (stats->parsed()) return cmd_stats(corpus_path, db_root, out_path);
    if (bench->parsed()) return cmd_bench(corpus_path, db_root, endpoint, out_path, concurrency);
    if (eval->parsed())
      return cmd_eval(corpus_path, predictions_path, db_root, config_path, records_out,
                      report_out, workers, timeout_ms);
    if (report->parsed()) return cmd_report(records_path, format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
