#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "finch/corpus.hpp"
#include "finch/eval.hpp"
#include "json.hpp"

namespace finch {

struct ReportError : std::runtime_error {
  explicit ReportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Corpus-level means, stored in percent. JSON keeps full precision; the
// human-readable renders round to one decimal.
struct AggregateReport {
  size_t n_pairs = 0;
  double em_pct = 0.0;
  double ex_pct = 0.0;
  double cm_pct = 0.0;
  double strict_pct = 0.0;
  double finch_pct = 0.0;

  struct Cell {
    double mean_pct = 0.0;
    size_t n = 0;
  };
  // clause cells average per_component sims over the pairs where the clause
  // appears in at least one side; n records that support per cell
  std::map<ComponentKind, Cell> per_clause;
  // FINCH mean per difficulty band; band counts sum to n_pairs
  std::map<Difficulty, Cell> per_difficulty;
};

inline AggregateReport aggregate(const std::vector<EvaluationRecord>& records,
                                 const Corpus* corpus = nullptr) {
  AggregateReport rep;
  rep.n_pairs = records.size();
  std::map<ComponentKind, double> clause_sum;
  std::map<Difficulty, double> band_sum;
  double em = 0, ex = 0, cm = 0, strict = 0, finch = 0;
  for (const auto& r : records) {
    if (corpus && !corpus->find(r.pair_id))
      throw ReportError("record references unknown pair: " + r.pair_id);
    em += r.em;
    ex += r.ex;
    cm += r.cm;
    strict += r.strict;
    finch += r.finch;
    for (const auto& [kind, sim] : r.per_component) {
      clause_sum[kind] += sim;
      rep.per_clause[kind].n += 1;
    }
    band_sum[r.difficulty] += r.finch;
    rep.per_difficulty[r.difficulty].n += 1;
  }
  if (rep.n_pairs > 0) {
    double n = static_cast<double>(rep.n_pairs);
    rep.em_pct = 100.0 * em / n;
    rep.ex_pct = 100.0 * ex / n;
    rep.cm_pct = 100.0 * cm / n;
    rep.strict_pct = 100.0 * strict / n;
    rep.finch_pct = 100.0 * finch / n;
  }
  for (auto& [kind, cell] : rep.per_clause)
    cell.mean_pct = 100.0 * clause_sum[kind] / static_cast<double>(cell.n);
  for (auto& [band, cell] : rep.per_difficulty)
    cell.mean_pct = 100.0 * band_sum[band] / static_cast<double>(cell.n);
  return rep;
}

namespace detail {

inline std::string pct1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

inline std::string clause_label(ComponentKind k) {
  std::string name = component_name(k);
  for (char& c : name)
    if (c == '_') c = ' ';
  return name;
}

}  // namespace detail

inline std::string render_json(const AggregateReport& rep) {
  nlohmann::ordered_json j;
  j["n_pairs"] = rep.n_pairs;
  j["metrics"] = {{"exact_matching_pct", rep.em_pct},
                  {"execution_accuracy_pct", rep.ex_pct},
                  {"component_matching_pct", rep.cm_pct},
                  {"strict_pct", rep.strict_pct},
                  {"finch_pct", rep.finch_pct}};
  nlohmann::ordered_json clauses = nlohmann::ordered_json::object();
  for (ComponentKind k : kAllComponents) {
    auto it = rep.per_clause.find(k);
    if (it == rep.per_clause.end()) continue;
    clauses[component_name(k)] = {{"mean_pct", it->second.mean_pct}, {"n", it->second.n}};
  }
  j["per_clause"] = clauses;
  nlohmann::ordered_json bands = nlohmann::ordered_json::object();
  for (Difficulty d :
       {Difficulty::EASY, Difficulty::MEDIUM, Difficulty::HARD, Difficulty::UNLABELED}) {
    auto it = rep.per_difficulty.find(d);
    if (it == rep.per_difficulty.end()) continue;
    bands[difficulty_name(d)] = {{"finch_pct", it->second.mean_pct}, {"n", it->second.n}};
  }
  j["per_difficulty"] = bands;
  return j.dump(2) + "\n";
}

inline AggregateReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AggregateReport rep;
  rep.n_pairs = j.at("n_pairs").get<size_t>();
  const auto& m = j.at("metrics");
  rep.em_pct = m.at("exact_matching_pct").get<double>();
  rep.ex_pct = m.at("execution_accuracy_pct").get<double>();
  rep.cm_pct = m.at("component_matching_pct").get<double>();
  rep.strict_pct = m.at("strict_pct").get<double>();
  rep.finch_pct = m.at("finch_pct").get<double>();
  for (const auto& [name, cell] : j.at("per_clause").items()) {
    auto kind = component_from_name(name);
    if (!kind) throw ReportError("unknown component in report: " + name);
    rep.per_clause[*kind] = {cell.at("mean_pct").get<double>(), cell.at("n").get<size_t>()};
  }
  for (const auto& [name, cell] : j.at("per_difficulty").items())
    rep.per_difficulty[difficulty_from_name(name)] = {cell.at("finch_pct").get<double>(),
                                                      cell.at("n").get<size_t>()};
  return rep;
}

// Markdown mirrors the familiar report layout: metrics as rows, then clause
// scores as columns, then the difficulty breakdown.
inline std::string render_markdown(const AggregateReport& rep) {
  std::string out;
  out += "## Evaluation Summary (" + std::to_string(rep.n_pairs) + " pairs)\n\n";
  out += "| Accuracy Metric | Score (%) |\n|---|---:|\n";
  out += "| Exact Matching | " + detail::pct1(rep.em_pct) + " |\n";
  out += "| Execution Accuracy | " + detail::pct1(rep.ex_pct) + " |\n";
  out += "| Component Matching | " + detail::pct1(rep.cm_pct) + " |\n";
  out += "| Strict Accuracy (EM+EX) | " + detail::pct1(rep.strict_pct) + " |\n";
  out += "| FINCH Score | " + detail::pct1(rep.finch_pct) + " |\n";

  std::vector<ComponentKind> kinds;
  for (ComponentKind k : kAllComponents)
    if (rep.per_clause.count(k)) kinds.push_back(k);
  if (!kinds.empty()) {
    out += "\n## Clause Performance\n\n|  |";
    for (ComponentKind k : kinds) out += " " + detail::clause_label(k) + " |";
    out += "\n|---|";
    for (size_t i = 0; i < kinds.size(); ++i) out += "---:|";
    out += "\n| Score (%) |";
    for (ComponentKind k : kinds) out += " " + detail::pct1(rep.per_clause.at(k).mean_pct) + " |";
    out += "\n| Pairs |";
    for (ComponentKind k : kinds) out += " " + std::to_string(rep.per_clause.at(k).n) + " |";
    out += "\n";
  }

  if (!rep.per_difficulty.empty()) {
    out += "\n## Difficulty Breakdown\n\n| Difficulty | FINCH Score (%) | Pairs |\n|---|---:|---:|\n";
    for (Difficulty d :
         {Difficulty::EASY, Difficulty::MEDIUM, Difficulty::HARD, Difficulty::UNLABELED}) {
      auto it = rep.per_difficulty.find(d);
      if (it == rep.per_difficulty.end()) continue;
      out += "| " + std::string(difficulty_name(d)) + " | " + detail::pct1(it->second.mean_pct) +
             " | " + std::to_string(it->second.n) + " |\n";
    }
  }
  return out;
}

// CSV keeps one table per section so each lands in its own file.
inline std::vector<std::pair<std::string, std::string>> render_csv(const AggregateReport& rep) {
  std::vector<std::pair<std::string, std::string>> sections;
  std::string metrics = "metric,score_pct\n";
  metrics += "exact_matching," + detail::pct1(rep.em_pct) + "\n";
  metrics += "execution_accuracy," + detail::pct1(rep.ex_pct) + "\n";
  metrics += "component_matching," + detail::pct1(rep.cm_pct) + "\n";
  metrics += "strict," + detail::pct1(rep.strict_pct) + "\n";
  metrics += "finch," + detail::pct1(rep.finch_pct) + "\n";
  sections.emplace_back("metrics", std::move(metrics));

  std::string clauses = "clause,mean_pct,n\n";
  for (ComponentKind k : kAllComponents) {
    auto it = rep.per_clause.find(k);
    if (it == rep.per_clause.end()) continue;
    clauses += std::string(component_name(k)) + "," + detail::pct1(it->second.mean_pct) + "," +
               std::to_string(it->second.n) + "\n";
  }
  sections.emplace_back("per_clause", std::move(clauses));

  std::string bands = "difficulty,finch_pct,n\n";
  for (Difficulty d :
       {Difficulty::EASY, Difficulty::MEDIUM, Difficulty::HARD, Difficulty::UNLABELED}) {
    auto it = rep.per_difficulty.find(d);
    if (it == rep.per_difficulty.end()) continue;
    bands += std::string(difficulty_name(d)) + "," + detail::pct1(it->second.mean_pct) + "," +
             std::to_string(it->second.n) + "\n";
  }
  sections.emplace_back("per_difficulty", std::move(bands));
  return sections;
}

}  // namespace finch
