#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "finch/corpus.hpp"
#include "fixtures.hpp"

using finch::Corpus;
using finch::Difficulty;
using finch::ErrorClass;
using finch::NlSqlPair;

namespace {

NlSqlPair mk(const std::string& id, const std::string& db, const std::string& q,
             const std::string& sql, Difficulty diff = Difficulty::UNLABELED) {
  NlSqlPair p;
  p.id = id;
  p.db_id = db;
  p.question = q;
  p.query = sql;
  p.difficulty = diff;
  return p;
}

std::string write_jsonl(const fixtures::TempDir& dir, const std::string& name,
                        const std::vector<NlSqlPair>& pairs) {
  std::string path = dir.str() + "/" + name;
  std::ofstream out(path);
  for (const auto& p : pairs) out << finch::pair_to_json(p).dump() << "\n";
  return path;
}

}  // namespace

TEST_CASE("pair JSON round trips including the null difficulty", "[corpus]") {
  NlSqlPair p = mk("p1", "accounts", "how many accounts?", "SELECT count(*) FROM accounts",
                   Difficulty::MEDIUM);
  p.source = "unit";
  auto j = finch::pair_to_json(p);
  CHECK(j.at("difficulty") == "medium");
  NlSqlPair back = finch::pair_from_json(j);
  CHECK(back.id == p.id);
  CHECK(back.db_id == p.db_id);
  CHECK(back.question == p.question);
  CHECK(back.query == p.query);
  CHECK(back.difficulty == Difficulty::MEDIUM);
  CHECK(back.source == "unit");

  NlSqlPair u = mk("p2", "accounts", "q", "SELECT 1");
  auto ju = finch::pair_to_json(u);
  CHECK(ju.at("difficulty").is_null());
  CHECK(finch::pair_from_json(ju).difficulty == Difficulty::UNLABELED);
}

TEST_CASE("pair parsing rejects blank gold queries", "[corpus]") {
  nlohmann::json j = {{"id", "x"}, {"db_id", "d"}, {"question", "q"}, {"query", "   "}};
  CHECK_THROWS(finch::pair_from_json(j));
}

TEST_CASE("difficulty names parse case-insensitively", "[corpus]") {
  CHECK(finch::difficulty_from_name("Easy") == Difficulty::EASY);
  CHECK(finch::difficulty_from_name("MEDIUM") == Difficulty::MEDIUM);
  CHECK(finch::difficulty_from_name("hard") == Difficulty::HARD);
  CHECK(finch::difficulty_from_name("") == Difficulty::UNLABELED);
  CHECK_THROWS(finch::difficulty_from_name("impossible"));
}

TEST_CASE("ingest drops byte-identical repeats and counts them", "[corpus]") {
  fixtures::TempDir dir("ingest");
  auto a = mk("p1", "db", "q1", "SELECT 1");
  auto dup = mk("p1-copy", "db", "q1", "SELECT 1");  // same content, new id
  auto b = mk("p2", "db", "q2", "SELECT 2");
  auto f1 = write_jsonl(dir, "a.jsonl", {a, dup});
  auto f2 = write_jsonl(dir, "b.jsonl", {b, a});  // exact repeat across files
  Corpus c = finch::ingest({f1, f2});
  REQUIRE(c.pairs.size() == 2);
  CHECK(c.duplicates_dropped == 2);
  CHECK(c.pairs[0].id == "p1");
  CHECK(c.pairs[1].id == "p2");
  CHECK(c.find("p1") != nullptr);
  CHECK(c.find("p1-copy") == nullptr);
}

TEST_CASE("ingest rejects one id used for different content", "[corpus]") {
  fixtures::TempDir dir("ingest");
  auto f = write_jsonl(dir, "a.jsonl",
                       {mk("p1", "db", "q1", "SELECT 1"), mk("p1", "db", "q1", "SELECT 2")});
  CHECK_THROWS(finch::ingest({f}));
}

TEST_CASE("ingest reports db_ids without a database file", "[corpus]") {
  fixtures::TempDir dir("ingest");
  fixtures::make_finance_dbs(dir.str() + "/dbs");
  auto f = write_jsonl(dir, "a.jsonl",
                       {mk("p1", "accounts", "q1", "SELECT 1"),
                        mk("p2", "ghost", "q2", "SELECT 2"),
                        mk("p3", "ghost", "q3", "SELECT 3")});
  Corpus c = finch::ingest({f}, dir.str() + "/dbs");
  REQUIRE(c.missing_dbs.size() == 1);
  CHECK(c.missing_dbs[0] == "ghost");
  CHECK(finch::ingest({f}).missing_dbs.empty());  // no db_root, no check
}

TEST_CASE("validation sends every pair to exactly one bucket", "[corpus]") {
  fixtures::TempDir dir("validate");
  fixtures::make_finance_dbs(dir.str());
  Corpus c;
  c.add(mk("ok1", "accounts", "q", "SELECT name FROM accounts WHERE id = 1"));
  c.add(mk("badcol", "accounts", "q", "SELECT nope FROM accounts"));
  c.add(mk("ok2", "accounts", "q", "SELECT count(*) FROM branches"));
  c.add(mk("badtab", "accounts", "q", "SELECT * FROM ghost_table"));
  c.add(mk("badsyn", "accounts", "q", "SELECT FROM WHERE"));
  c.add(mk("nodb", "ghost", "q", "SELECT 1"));
  auto res = finch::validate_corpus(c, dir.str(), 5000, 2);

  REQUIRE(res.clean.pairs.size() == 2);
  CHECK(res.clean.pairs[0].id == "ok1");
  CHECK(res.clean.pairs[1].id == "ok2");
  REQUIRE(res.anomalies.size() == 4);
  CHECK(res.anomalies[0].pair_id == "badcol");
  CHECK(res.anomalies[0].error_class == ErrorClass::UNKNOWN_COLUMN);
  CHECK(res.anomalies[1].pair_id == "badtab");
  CHECK(res.anomalies[1].error_class == ErrorClass::UNKNOWN_TABLE);
  CHECK(res.anomalies[2].pair_id == "badsyn");
  CHECK(res.anomalies[2].error_class == ErrorClass::SYNTAX_ERROR);
  CHECK(res.anomalies[3].pair_id == "nodb");
  CHECK(res.anomalies[3].error_class == ErrorClass::OTHER);
  for (const auto& a : res.anomalies) CHECK_FALSE(a.diagnostic.empty());
}

TEST_CASE("validation flags runaway gold queries as timeouts", "[corpus]") {
  fixtures::TempDir dir("validate");
  fixtures::make_finance_dbs(dir.str());
  Corpus c;
  c.add(mk("slow", "accounts", "q",
           "WITH RECURSIVE r(n) AS (SELECT 1 UNION ALL SELECT n + 1 FROM r) "
           "SELECT count(*) FROM r"));
  auto res = finch::validate_corpus(c, dir.str(), 150, 1);
  REQUIRE(res.anomalies.size() == 1);
  CHECK(res.anomalies[0].error_class == ErrorClass::TIMEOUT);
  CHECK(res.clean.pairs.empty());
}

TEST_CASE("difficulty bands follow the structural rule", "[corpus]") {
  auto band = [](const std::string& sql) {
    return finch::annotate_difficulty(mk("x", "accounts", "q", sql));
  };
  // flat single-table lookups are easy
  CHECK(band("SELECT name FROM accounts") == Difficulty::EASY);
  CHECK(band("SELECT name FROM accounts WHERE id = 3") == Difficulty::EASY);
  // a single complexity trigger lands in medium
  CHECK(band("SELECT count(*) FROM accounts") == Difficulty::MEDIUM);
  CHECK(band("SELECT name FROM accounts ORDER BY name") == Difficulty::MEDIUM);
  CHECK(band("SELECT name FROM accounts WHERE id > 1 AND balance > 0") == Difficulty::MEDIUM);
  CHECK(band("SELECT branch, count(*) FROM accounts GROUP BY branch HAVING count(*) > 2") ==
        Difficulty::MEDIUM);
  CHECK(band("SELECT a.name FROM accounts a JOIN branches b ON a.branch = b.name") ==
        Difficulty::MEDIUM);
  // two triggers, or nesting two levels deep, is hard
  CHECK(band("SELECT a.name FROM accounts a JOIN branches b ON a.branch = b.name "
             "WHERE a.balance > (SELECT avg(balance) FROM accounts)") == Difficulty::HARD);
  CHECK(band("SELECT name FROM accounts WHERE id > 1 AND balance > 0 AND status = 'active' "
             "AND branch = 'north' ORDER BY name LIMIT 2") == Difficulty::MEDIUM);
  CHECK(band("SELECT a.name FROM accounts a JOIN branches b ON a.branch = b.name "
             "WHERE a.id > 1 AND a.balance > 0 AND a.status = 'active'") == Difficulty::HARD);
  CHECK(band("SELECT name FROM accounts WHERE id IN (SELECT id FROM accounts WHERE "
             "balance > (SELECT avg(balance) FROM accounts))") == Difficulty::HARD);
  // unparseable gold cannot be banded
  CHECK(band("SELEC name FROM accounts") == Difficulty::UNLABELED);
}

TEST_CASE("annotation fills gaps and keeps explicit labels", "[corpus]") {
  Corpus c;
  c.add(mk("keep", "accounts", "q", "SELECT count(*) FROM accounts", Difficulty::HARD));
  c.add(mk("fill", "accounts", "q", "SELECT name FROM accounts"));
  c.add(mk("bad", "accounts", "q", "SELEC name FROM accounts"));
  size_t flagged = finch::annotate_corpus(c);
  CHECK(flagged == 1);
  CHECK(c.pairs[0].difficulty == Difficulty::HARD);  // label wins over the rule
  CHECK(c.pairs[1].difficulty == Difficulty::EASY);
  CHECK(c.pairs[2].difficulty == Difficulty::UNLABELED);
}

TEST_CASE("corpus statistics count schema objects per database", "[corpus]") {
  fixtures::TempDir dir("stats");
  fixtures::make_finance_dbs(dir.str());
  Corpus c;
  c.add(mk("p1", "accounts", "q", "SELECT 1", Difficulty::EASY));
  c.add(mk("p2", "transactions", "q", "SELECT 1", Difficulty::MEDIUM));
  c.add(mk("p3", "loans", "q", "SELECT 1", Difficulty::MEDIUM));
  c.add(mk("p4", "loans", "q2", "SELECT 2"));
  auto stats = finch::corpus_stats(c, dir.str());
  CHECK(stats.n_pairs == 4);
  CHECK(stats.n_databases == 3);
  // accounts: accounts(6) + branches(3); transactions: accounts(3) + transactions(5);
  // loans: borrowers(3) + loans(6)
  CHECK(stats.n_tables == 6);
  CHECK(stats.n_columns == 26);
  CHECK(stats.n_relations == 2);
  CHECK(stats.tables_per_db == 2.0);
  CHECK(stats.difficulty_histogram.at("easy") == 1);
  CHECK(stats.difficulty_histogram.at("medium") == 2);
  CHECK(stats.difficulty_histogram.at("hard") == 0);
  CHECK(stats.difficulty_histogram.at("unlabeled") == 1);
  CHECK(stats.warnings.empty());

  c.add(mk("p5", "ghost", "q", "SELECT 1"));
  auto with_missing = finch::corpus_stats(c, dir.str());
  CHECK(with_missing.n_databases == 3);  // missing db excluded, not fatal
  REQUIRE(with_missing.warnings.size() == 1);
}

TEST_CASE("a corpus survives a write and re-ingest round trip", "[corpus]") {
  fixtures::TempDir dir("roundtrip");
  Corpus c = fixtures::fixture_corpus();
  finch::annotate_corpus(c);
  std::string path = dir.str() + "/corpus.jsonl";
  finch::write_corpus(c, path);
  Corpus back = finch::ingest({path});
  REQUIRE(back.pairs.size() == c.pairs.size());
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    CHECK(back.pairs[i].id == c.pairs[i].id);
    CHECK(back.pairs[i].db_id == c.pairs[i].db_id);
    CHECK(back.pairs[i].query == c.pairs[i].query);
    CHECK(back.pairs[i].difficulty == c.pairs[i].difficulty);
  }
  CHECK(back.duplicates_dropped == 0);
}
