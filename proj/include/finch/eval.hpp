#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "finch/corpus.hpp"
#include "finch/decompose.hpp"
#include "finch/execution.hpp"
#include "finch/metrics.hpp"
#include "finch/util.hpp"
#include "json.hpp"

namespace finch {

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Everything `report` needs downstream lives in the record itself, including
// the difficulty label, so records aggregate without the corpus at hand.
struct EvaluationRecord {
  std::string pair_id;
  std::string db_id;
  Difficulty difficulty = Difficulty::UNLABELED;
  double em = 0.0;
  double ex = 0.0;
  double cm = 0.0;
  double strict = 0.0;
  double structure = 0.0;  // weighted clause score S
  double gate = 0.0;       // tolerance-gated execution bit e
  double finch = 0.0;
  // only components present in at least one of the two queries
  std::map<ComponentKind, double> per_component;
  std::optional<ErrorClass> error_class;
};

inline nlohmann::json record_to_json(const EvaluationRecord& r) {
  nlohmann::json pc = nlohmann::json::object();
  for (const auto& [kind, sim] : r.per_component) pc[component_name(kind)] = sim;
  nlohmann::json j = {{"pair_id", r.pair_id},
                      {"db_id", r.db_id},
                      {"difficulty", difficulty_name(r.difficulty)},
                      {"em", r.em},
                      {"ex", r.ex},
                      {"cm", r.cm},
                      {"strict", r.strict},
                      {"structure", r.structure},
                      {"gate", r.gate},
                      {"finch", r.finch},
                      {"per_component", pc}};
  if (r.error_class) j["error_class"] = error_class_name(*r.error_class);
  else j["error_class"] = nullptr;
  return j;
}

inline EvaluationRecord record_from_json(const nlohmann::json& j) {
  EvaluationRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.db_id = j.value("db_id", "");
  r.difficulty = difficulty_from_name(j.value("difficulty", "unlabeled"));
  r.em = j.at("em").get<double>();
  r.ex = j.at("ex").get<double>();
  r.cm = j.at("cm").get<double>();
  r.strict = j.at("strict").get<double>();
  r.structure = j.at("structure").get<double>();
  r.gate = j.at("gate").get<double>();
  r.finch = j.at("finch").get<double>();
  if (j.contains("per_component")) {
    for (const auto& [name, sim] : j.at("per_component").items()) {
      auto kind = component_from_name(name);
      if (!kind) throw EvalError("unknown component in record: " + name);
      r.per_component[*kind] = sim.get<double>();
    }
  }
  if (j.contains("error_class") && !j.at("error_class").is_null())
    r.error_class = error_class_from_name(j.at("error_class").get<std::string>());
  return r;
}

// Scores one prediction against its gold query. The gold side must parse and
// execute cleanly (corpus validation guarantees this); a failure there is an
// evaluation error, never a zero score. Prediction failures score zero.
inline EvaluationRecord evaluate_pair(const std::string& pred, const std::string& gold,
                                      Database& db, const MetricConfig& cfg,
                                      int timeout_ms = 30000) {
  cfg.validate();
  DecomposeResult gold_dec = decompose(gold);
  if (!gold_dec.ok) throw EvalError("gold query does not parse: " + gold_dec.error);
  ExecutionOutcome gold_out = db.execute(gold, timeout_ms);
  if (!gold_out.ok) throw EvalError("gold query does not execute: " + gold_out.diagnostic);

  EvaluationRecord rec;
  rec.em = exact_match(pred, gold);

  DecomposeResult pred_dec = decompose(pred);
  if (!pred_dec.ok) {
    for (ComponentKind kind : kAllComponents)
      if (gold_dec.decomp.has(kind)) rec.per_component[kind] = 0.0;
    rec.structure = 0.0;
    rec.cm = component_matching(Decomposition{}, gold_dec.decomp);
    rec.gate = 0.0;
    rec.ex = 0.0;
    rec.error_class = classify_error(pred_dec.error);
  } else {
    ComponentSimilarities sims = component_similarities(pred_dec.decomp, gold_dec.decomp, cfg);
    rec.structure = weighted_component_score(sims, cfg);
    rec.cm = component_matching(pred_dec.decomp, gold_dec.decomp);
    for (ComponentKind kind : kAllComponents)
      if (pred_dec.decomp.has(kind) || gold_dec.decomp.has(kind))
        rec.per_component[kind] = sims.s.at(kind);

    ExecutionOutcome pred_out = db.execute(pred, timeout_ms);
    bool order_sensitive = gold_dec.decomp.has(ComponentKind::ORDER_BY);
    rec.gate = execution_similarity(pred_out, gold_out, cfg.tau, order_sensitive);
    rec.ex = execution_similarity(pred_out, gold_out, 0.0, order_sensitive);
    if (!pred_out.ok) rec.error_class = pred_out.error_class;
  }
  rec.strict = rec.em * rec.ex;
  rec.finch = combined_score(rec.structure, rec.gate != 0.0 ? 1 : 0, cfg);
  return rec;
}

// pair_id -> extracted SQL; nullopt marks an extraction failure. Pairs absent
// from the map are scored the same way as extraction failures.
using PredictionMap = std::map<std::string, std::optional<std::string>>;

// Parallel evaluation with one database connection per (worker, db_id). Pairs
// whose gold side fails are skipped with a warning rather than poisoning the
// run; validated corpora never hit that path.
inline std::vector<EvaluationRecord> evaluate_corpus(const Corpus& corpus,
                                                     const PredictionMap& predictions,
                                                     const std::string& db_root,
                                                     const MetricConfig& cfg, int workers = 8,
                                                     int timeout_ms = 30000,
                                                     std::ostream* log = nullptr) {
  cfg.validate();
  size_t n = corpus.pairs.size();
  size_t n_workers = static_cast<size_t>(std::max(1, workers));
  std::vector<std::optional<EvaluationRecord>> slots(n);
  std::vector<std::string> warnings(n);
  std::vector<std::map<std::string, Database>> db_cache(n_workers);

  parallel_for_workers(n, n_workers, [&](size_t worker, size_t i) {
    const NlSqlPair& pair = corpus.pairs[i];
    try {
      auto& cache = db_cache[worker];
      auto it = cache.find(pair.db_id);
      if (it == cache.end())
        it = cache.emplace(pair.db_id, Database::open(db_root, pair.db_id)).first;
      std::string pred;
      if (auto pit = predictions.find(pair.id); pit != predictions.end() && pit->second)
        pred = *pit->second;
      EvaluationRecord rec = evaluate_pair(pred, pair.query, it->second, cfg, timeout_ms);
      rec.pair_id = pair.id;
      rec.db_id = pair.db_id;
      rec.difficulty = pair.difficulty;
      slots[i] = std::move(rec);
    } catch (const std::exception& e) {
      warnings[i] = pair.id + ": " + e.what();
    }
  });

  std::vector<EvaluationRecord> records;
  records.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (slots[i]) records.push_back(std::move(*slots[i]));
    else if (log) *log << "warning: skipping pair " << warnings[i] << "\n";
  }
  return records;
}

}  // namespace finch
