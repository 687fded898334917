#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "finch/decompose.hpp"
#include "finch/execution.hpp"
#include "finch/jsonl.hpp"
#include "finch/util.hpp"

namespace finch {

enum class Difficulty { EASY, MEDIUM, HARD, UNLABELED };

inline const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::EASY: return "easy";
    case Difficulty::MEDIUM: return "medium";
    case Difficulty::HARD: return "hard";
    case Difficulty::UNLABELED: return "unlabeled";
  }
  return "unlabeled";
}

inline Difficulty difficulty_from_name(const std::string& s) {
  std::string low = to_lower(s);
  if (low == "easy") return Difficulty::EASY;
  if (low == "medium") return Difficulty::MEDIUM;
  if (low == "hard") return Difficulty::HARD;
  if (low.empty() || low == "unlabeled") return Difficulty::UNLABELED;
  throw std::runtime_error("unknown difficulty: " + s);
}

struct NlSqlPair {
  std::string id;
  std::string db_id;
  std::string question;
  std::string query;
  Difficulty difficulty = Difficulty::UNLABELED;
  std::string source;
};

struct CorpusError : std::runtime_error {
  explicit CorpusError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Corpus {
  std::vector<NlSqlPair> pairs;
  size_t duplicates_dropped = 0;
  std::vector<std::string> missing_dbs;  // db_ids without a database file

  const NlSqlPair* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &pairs[it->second];
  }

  void add(NlSqlPair pair) {
    index_[pair.id] = pairs.size();
    pairs.push_back(std::move(pair));
  }

  void rebuild_index() {
    index_.clear();
    for (size_t i = 0; i < pairs.size(); ++i) index_[pairs[i].id] = i;
  }

 private:
  std::map<std::string, size_t> index_;
};

inline nlohmann::json pair_to_json(const NlSqlPair& p) {
  nlohmann::json j = {{"id", p.id},       {"db_id", p.db_id}, {"question", p.question},
                      {"query", p.query}, {"source", p.source}};
  if (p.difficulty == Difficulty::UNLABELED) j["difficulty"] = nullptr;
  else j["difficulty"] = difficulty_name(p.difficulty);
  return j;
}

inline NlSqlPair pair_from_json(const nlohmann::json& j) {
  NlSqlPair p;
  p.id = j.at("id").get<std::string>();
  p.db_id = j.at("db_id").get<std::string>();
  p.question = j.at("question").get<std::string>();
  p.query = j.at("query").get<std::string>();
  if (trim_view(p.query).empty()) throw std::runtime_error("empty query");
  if (j.contains("difficulty") && !j.at("difficulty").is_null())
    p.difficulty = difficulty_from_name(j.at("difficulty").get<std::string>());
  if (j.contains("source") && !j.at("source").is_null())
    p.source = j.at("source").get<std::string>();
  return p;
}

// Loads corpus files, drops byte-identical (db_id, question, query) repeats
// with a count, rejects conflicting reuse of an id, and reports db_ids whose
// database file is missing under db_root (empty db_root skips the check).
inline Corpus ingest(const std::vector<std::string>& files, const std::string& db_root = "") {
  Corpus corpus;
  std::map<std::string, std::string> id_to_key;
  std::set<std::string> seen_keys;
  for (const auto& file : files) {
    for_each_jsonl_line(file, [&](size_t, const nlohmann::json& j) {
      NlSqlPair p = pair_from_json(j);
      std::string key = p.db_id + '\x1f' + p.question + '\x1f' + p.query;
      if (seen_keys.count(key)) {
        ++corpus.duplicates_dropped;
        return;
      }
      auto it = id_to_key.find(p.id);
      if (it != id_to_key.end())
        throw std::runtime_error("duplicate id with different content: " + p.id);
      seen_keys.insert(key);
      id_to_key.emplace(p.id, key);
      corpus.add(std::move(p));
    });
  }
  if (!db_root.empty()) {
    std::set<std::string> checked;
    for (const auto& p : corpus.pairs) {
      if (!checked.insert(p.db_id).second) continue;
      if (!std::filesystem::exists(db_path(db_root, p.db_id)))
        corpus.missing_dbs.push_back(p.db_id);
    }
  }
  return corpus;
}

inline void write_corpus(const Corpus& corpus, const std::string& path) {
  JsonlWriter out(path);
  for (const auto& p : corpus.pairs) out.write(pair_to_json(p));
}

struct AnomalyRecord {
  std::string pair_id;
  ErrorClass error_class = ErrorClass::OTHER;
  std::string diagnostic;
};

inline nlohmann::json anomaly_to_json(const AnomalyRecord& a) {
  return {{"pair_id", a.pair_id},
          {"error_class", error_class_name(a.error_class)},
          {"diagnostic", a.diagnostic}};
}

struct ValidationResult {
  std::vector<AnomalyRecord> anomalies;
  Corpus clean;
};

// The corpus-curation gate: every gold query must parse and execute against
// its database. Each pair lands in exactly one of clean/anomalies.
inline ValidationResult validate_corpus(const Corpus& corpus, const std::string& db_root,
                                        int timeout_ms = 30000, int workers = 8) {
  size_t n_workers = static_cast<size_t>(std::max(1, workers));
  std::vector<std::optional<AnomalyRecord>> slots(corpus.pairs.size());
  std::vector<std::map<std::string, Database>> worker_dbs(n_workers);
  parallel_for_workers(corpus.pairs.size(), n_workers, [&](size_t w, size_t i) {
    const NlSqlPair& p = corpus.pairs[i];
    auto d = decompose(p.query);
    if (!d.ok) {
      slots[i] = AnomalyRecord{p.id, classify_error(d.error), d.error};
      return;
    }
    auto& cache = worker_dbs[w];
    auto it = cache.find(p.db_id);
    if (it == cache.end()) {
      try {
        it = cache.emplace(p.db_id, Database::open(db_root, p.db_id)).first;
      } catch (const DbError& e) {
        slots[i] = AnomalyRecord{p.id, ErrorClass::OTHER, e.what()};
        return;
      }
    }
    auto outcome = it->second.execute(p.query, timeout_ms);
    if (!outcome.ok) slots[i] = AnomalyRecord{p.id, outcome.error_class, outcome.diagnostic};
  });
  ValidationResult result;
  for (size_t i = 0; i < corpus.pairs.size(); ++i) {
    if (slots[i]) result.anomalies.push_back(std::move(*slots[i]));
    else result.clean.add(corpus.pairs[i]);
  }
  return result;
}

// Deterministic band rule over the decomposition. HARD needs two complexity
// triggers (or deep nesting); EASY is the flat single-table case; everything
// else is MEDIUM. Unparseable gold stays UNLABELED.
inline Difficulty annotate_difficulty(const NlSqlPair& pair) {
  auto r = decompose(pair.query);
  if (!r.ok) return Difficulty::UNLABELED;
  const Decomposition& d = r.decomp;
  int triggers = 0;
  if (d.has(ComponentKind::JOIN)) ++triggers;
  if (d.has(ComponentKind::SUBQUERY)) ++triggers;
  if (d.has(ComponentKind::GROUP_BY) && d.has(ComponentKind::HAVING)) ++triggers;
  if (d.items(ComponentKind::WHERE).size() >= 3) ++triggers;
  if (triggers >= 2 || d.nesting_depth >= 2) return Difficulty::HARD;
  bool easy = d.items(ComponentKind::FROM).size() <= 1 && !d.has(ComponentKind::SUBQUERY) &&
              !d.has(ComponentKind::AGG) && d.items(ComponentKind::WHERE).size() <= 1 &&
              !d.has(ComponentKind::GROUP_BY) && !d.has(ComponentKind::HAVING) &&
              !d.has(ComponentKind::ORDER_BY);
  return easy ? Difficulty::EASY : Difficulty::MEDIUM;
}

// Fills in missing labels only; already-labeled pairs keep their label.
// Returns how many pairs stayed UNLABELED because the gold did not parse.
inline size_t annotate_corpus(Corpus& corpus) {
  size_t flagged = 0;
  for (auto& p : corpus.pairs) {
    if (p.difficulty != Difficulty::UNLABELED) continue;
    p.difficulty = annotate_difficulty(p);
    if (p.difficulty == Difficulty::UNLABELED) ++flagged;
  }
  return flagged;
}

struct CorpusStats {
  size_t n_pairs = 0;
  size_t n_databases = 0;
  size_t n_tables = 0;
  size_t n_columns = 0;
  size_t n_relations = 0;
  std::map<std::string, size_t> difficulty_histogram;
  double tables_per_db = 0.0;
  std::vector<std::string> warnings;
};

inline nlohmann::json stats_to_json(const CorpusStats& s) {
  return {{"n_pairs", s.n_pairs},
          {"n_databases", s.n_databases},
          {"n_tables", s.n_tables},
          {"n_columns", s.n_columns},
          {"n_relations", s.n_relations},
          {"difficulty_histogram", s.difficulty_histogram},
          {"tables_per_db", s.tables_per_db},
          {"warnings", s.warnings}};
}

inline CorpusStats corpus_stats(const Corpus& corpus, const std::string& db_root) {
  CorpusStats stats;
  stats.n_pairs = corpus.pairs.size();
  for (const char* band : {"easy", "medium", "hard", "unlabeled"})
    stats.difficulty_histogram[band] = 0;
  std::set<std::string> db_ids;
  for (const auto& p : corpus.pairs) {
    ++stats.difficulty_histogram[difficulty_name(p.difficulty)];
    db_ids.insert(p.db_id);
  }
  for (const auto& db_id : db_ids) {
    Database db;
    try {
      db = Database::open(db_root, db_id);
    } catch (const DbError& e) {
      stats.warnings.push_back(std::string(e.what()) + "; excluded from schema counts");
      continue;
    }
    try {
      auto tables = db.catalog_query(
          "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%' "
          "ORDER BY name");
      ++stats.n_databases;
      stats.n_tables += tables.size();
      for (const auto& row : tables) {
        const std::string& table = row.at(0).s;
        std::string quoted = "\"";
        for (char c : table) {
          quoted += c;
          if (c == '"') quoted += '"';
        }
        quoted += "\"";
        stats.n_columns += db.catalog_query("PRAGMA table_info(" + quoted + ")").size();
        stats.n_relations += db.catalog_query("PRAGMA foreign_key_list(" + quoted + ")").size();
      }
    } catch (const DbError& e) {
      stats.warnings.push_back(std::string(e.what()) + "; excluded from schema counts");
    }
  }
  if (stats.n_databases > 0)
    stats.tables_per_db =
        static_cast<double>(stats.n_tables) / static_cast<double>(stats.n_databases);
  return stats;
}

}  // namespace finch
