#pragma once

// Shared test fixtures: three synthetic finance databases, a hand-written
// NL-SQL pair set over them, and small process/file helpers.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sqlite3.h>

#include "finch/corpus.hpp"
#include "finch/jsonl.hpp"

namespace fixtures {

// Deterministic xorshift generator so property tests replay identically on
// every platform.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  size_t below(size_t n) { return n == 0 ? 0 : static_cast<size_t>(next() % n); }
  double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
  bool chance(double p) { return unit() < p; }
};

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("finch_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void exec_sql(sqlite3* db, const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown sqlite error";
    sqlite3_free(err);
    throw std::runtime_error("fixture sql failed: " + msg + " in: " + sql);
  }
}

inline std::string sql_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Creates <root>/<db_id>/<db_id>.sqlite populated with deterministic rows.
// Numeric columns used by aggregates carry globally distinct values so any
// group of two or more rows has distinct min and max.
inline void make_finance_dbs(const std::filesystem::path& root) {
  const char* branches[] = {"north", "south", "east", "west"};
  const char* firsts[] = {"Ada", "Bo", "Cleo", "Dev", "Esme", "Finn", "Gita"};
  const char* lasts[] = {"Reyes", "Chen", "Okafor", "Larsen"};

  auto open_db = [&](const std::string& id) {
    std::filesystem::create_directories(root / id);
    std::string file = (root / id / (id + ".sqlite")).string();
    sqlite3* db = nullptr;
    if (sqlite3_open(file.c_str(), &db) != SQLITE_OK)
      throw std::runtime_error("cannot create fixture db " + file);
    return db;
  };

  {
    sqlite3* db = open_db("accounts");
    exec_sql(db,
             "CREATE TABLE accounts(id INTEGER PRIMARY KEY, name TEXT, branch TEXT, "
             "balance REAL, status TEXT, opened TEXT)");
    exec_sql(db,
             "CREATE TABLE branches(name TEXT PRIMARY KEY, city TEXT, region TEXT)");
    exec_sql(db, "INSERT INTO branches VALUES ('north','oslo','no'),('south','lyon','eu'),"
                 "('east','riga','eu'),('west','porto','eu')");
    const char* statuses[] = {"active", "closed", "active"};
    exec_sql(db, "BEGIN");
    for (int i = 1; i <= 28; ++i) {
      std::string name = std::string(firsts[(i - 1) % 7]) + " " + lasts[(i - 1) % 4];
      std::string status = (i % 11 == 0) ? "frozen" : statuses[(i - 1) % 3];
      double balance = 150.0 * i + 13.5 * ((i * 3) % 7);
      char opened[16];
      std::snprintf(opened, sizeof(opened), "%04d-%02d-%02d", 2018 + i % 5, 1 + i % 12,
                    1 + i % 27);
      exec_sql(db, "INSERT INTO accounts VALUES (" + std::to_string(i) + ",'" + name + "','" +
                       branches[(i - 1) % 4] + "'," + sql_real(balance) + ",'" + status + "','" +
                       opened + "')");
    }
    exec_sql(db, "COMMIT");
    sqlite3_close(db);
  }

  {
    sqlite3* db = open_db("transactions");
    exec_sql(db, "CREATE TABLE accounts(id INTEGER PRIMARY KEY, holder TEXT, branch TEXT)");
    exec_sql(db,
             "CREATE TABLE transactions(id INTEGER PRIMARY KEY, account_id INTEGER, "
             "amount REAL, kind TEXT, ts TEXT, "
             "FOREIGN KEY(account_id) REFERENCES accounts(id))");
    exec_sql(db, "BEGIN");
    for (int i = 1; i <= 8; ++i) {
      std::string holder = std::string(firsts[i % 7]) + " " + lasts[i % 4];
      exec_sql(db, "INSERT INTO accounts VALUES (" + std::to_string(i) + ",'" + holder + "','" +
                       branches[(i - 1) % 4] + "')");
    }
    const char* kinds[] = {"deposit", "withdrawal", "fee"};
    for (int i = 1; i <= 30; ++i) {
      double amount = 55.0 * i + 7.25 * ((i * 5) % 9);
      char ts[16];
      std::snprintf(ts, sizeof(ts), "2023-%02d-%02d", 1 + i % 12, 1 + i % 28);
      exec_sql(db, "INSERT INTO transactions VALUES (" + std::to_string(i) + "," +
                       std::to_string(i % 8 + 1) + "," + sql_real(amount) + ",'" +
                       kinds[(i - 1) % 3] + "','" + ts + "')");
    }
    exec_sql(db, "COMMIT");
    sqlite3_close(db);
  }

  {
    sqlite3* db = open_db("loans");
    exec_sql(db, "CREATE TABLE borrowers(id INTEGER PRIMARY KEY, name TEXT, segment TEXT)");
    exec_sql(db,
             "CREATE TABLE loans(id INTEGER PRIMARY KEY, borrower_id INTEGER, "
             "principal REAL, rate REAL, term INTEGER, status TEXT, "
             "FOREIGN KEY(borrower_id) REFERENCES borrowers(id))");
    exec_sql(db, "BEGIN");
    for (int i = 1; i <= 8; ++i) {
      std::string name = std::string(firsts[(i + 2) % 7]) + " " + lasts[(i + 1) % 4];
      exec_sql(db, "INSERT INTO borrowers VALUES (" + std::to_string(i) + ",'" + name + "','" +
                       (i % 2 == 1 ? "retail" : "corporate") + "')");
    }
    const char* statuses[] = {"open", "closed", "open", "defaulted"};
    for (int i = 1; i <= 26; ++i) {
      double principal = 8000.0 + 3700.0 * i;
      double rate = 2.5 + 0.17 * i;
      int term = 12 * (1 + i % 8);
      exec_sql(db, "INSERT INTO loans VALUES (" + std::to_string(i) + "," +
                       std::to_string(i % 8 + 1) + "," + sql_real(principal) + "," +
                       sql_real(rate) + "," + std::to_string(term) + ",'" +
                       statuses[(i - 1) % 4] + "')");
    }
    exec_sql(db, "COMMIT");
    sqlite3_close(db);
  }
}

// One NL-SQL fixture pair, stored as parts so perturbed variants (drop the
// first WHERE conjunct, swap the min/max aggregate, drop ORDER BY) rebuild
// from the same recipe instead of string surgery.
struct Recipe {
  std::string id;
  std::string db_id;
  std::string question;
  std::string select_pre;            // select items before the aggregate ("" if none)
  std::string agg;                   // exactly one min(...) or max(...) call
  std::string from;                  // FROM clause body, rendered verbatim
  std::vector<std::string> wheres;   // 1..3 conjuncts, AND-joined
  std::string group_by;              // "" for ungrouped
  std::string having;                // "" if absent
  std::string order_by;              // plain column, may carry " DESC"
  std::string limit;                 // "" if absent
};

inline std::string swap_min_max(const std::string& agg) {
  if (agg.rfind("min(", 0) == 0) return "max(" + agg.substr(4);
  if (agg.rfind("max(", 0) == 0) return "min(" + agg.substr(4);
  throw std::runtime_error("recipe aggregate must start with min( or max(: " + agg);
}

inline std::string recipe_sql(const Recipe& r, bool drop_first_where = false,
                              bool swap_agg = false, bool drop_order = false) {
  std::string sql = "SELECT ";
  if (!r.select_pre.empty()) sql += r.select_pre + ", ";
  sql += swap_agg ? swap_min_max(r.agg) : r.agg;
  sql += " FROM " + r.from;
  std::vector<std::string> wheres(r.wheres.begin() + (drop_first_where ? 1 : 0),
                                  r.wheres.end());
  for (size_t i = 0; i < wheres.size(); ++i)
    sql += (i == 0 ? " WHERE " : " AND ") + wheres[i];
  if (!r.group_by.empty()) sql += " GROUP BY " + r.group_by;
  if (!r.having.empty()) sql += " HAVING " + r.having;
  if (!drop_order && !r.order_by.empty()) sql += " ORDER BY " + r.order_by;
  if (!r.limit.empty()) sql += " LIMIT " + r.limit;
  return sql;
}

// Hand-written pair set: 54 aggregate queries over the three databases. Every
// recipe keeps one min/max aggregate, one to three WHERE conjuncts whose first
// conjunct materially restricts the result, and a plain ORDER BY.
inline const std::vector<Recipe>& fixture_recipes() {
  static const std::vector<Recipe> recipes = {
      // accounts
      {"a01", "accounts", "For each branch other than west, what is the highest account balance?",
       "branch", "max(balance)", "accounts", {"branch <> 'west'"}, "branch", "", "branch", ""},
      {"a02", "accounts", "Outside the north branch, list each branch with its lowest balance, descending by branch.",
       "branch", "min(balance)", "accounts", {"branch <> 'north'"}, "branch", "", "branch DESC", ""},
      {"a03", "accounts", "Among active accounts under 3000, what is the top balance per branch?",
       "branch", "max(balance)", "accounts", {"balance < 3000", "status = 'active'"}, "branch", "",
       "branch", ""},
      {"a04", "accounts", "For balances above 700 on unfrozen accounts, what is the lowest balance per branch?",
       "branch", "min(balance)", "accounts", {"balance > 700", "status <> 'frozen'"}, "branch", "",
       "branch", ""},
      {"a05", "accounts", "What is the highest balance per status among active accounts?",
       "status", "max(balance)", "accounts", {"status = 'active'"}, "status", "", "status", ""},
      {"a06", "accounts", "Away from west and since 2019, what is the lowest balance above 1000 per status?",
       "status", "min(balance)", "accounts",
       {"balance > 1000", "branch <> 'west'", "opened >= '2019-01-01'"}, "status", "", "status",
       ""},
      {"a07", "accounts", "Within the north branch and under 3500, what is the highest balance per status?",
       "status", "max(balance)", "accounts", {"balance < 3500", "branch = 'north'"}, "status", "",
       "status", ""},
      {"a08", "accounts", "For branches in the eu region, when did the earliest account open per branch?",
       "branch", "min(opened)", "accounts",
       {"branch IN (SELECT name FROM branches WHERE region = 'eu')"}, "branch", "", "branch", ""},
      {"a09", "accounts", "Outside the no region, what is the highest balance per region?",
       "branches.region", "max(accounts.balance)",
       "accounts JOIN branches ON accounts.branch = branches.name", {"branches.region <> 'no'"},
       "branches.region", "", "branches.region", ""},
      {"a10", "accounts", "For active accounts over 1500, what is the lowest balance per branch city?",
       "branches.city", "min(accounts.balance)",
       "accounts JOIN branches ON accounts.branch = branches.name",
       {"accounts.balance > 1500", "accounts.status = 'active'"}, "branches.city", "",
       "branches.city", ""},
      {"a11", "accounts", "Under 3800, what is the top balance for branches holding at least two such accounts?",
       "branch", "max(balance)", "accounts", {"balance < 3800"}, "branch", "count(*) >= 2",
       "branch", ""},
      {"a12", "accounts", "Skipping closed accounts above 800, what is the lowest balance per status with at least two accounts?",
       "status", "min(balance)", "accounts", {"status <> 'closed'", "balance > 800"}, "status",
       "count(*) >= 2", "status", ""},
      {"a13", "accounts", "Excluding south, show the top three branches by name with their highest balance.",
       "branch", "max(balance)", "accounts", {"branch <> 'south'"}, "branch", "", "branch", "3"},
      {"a14", "accounts", "Above 600, list the last two branches by reverse name with their lowest balance.",
       "branch", "min(balance)", "accounts", {"balance > 600"}, "branch", "", "branch DESC", "2"},
      {"a15", "accounts", "For eu-region branches with active accounts, what is the highest balance per branch?",
       "branch", "max(balance)", "accounts",
       {"branch IN (SELECT name FROM branches WHERE region = 'eu')", "status = 'active'"},
       "branch", "", "branch", ""},
      {"a16", "accounts", "Above 900 in eu-region branches, what is the lowest active balance per branch?",
       "branch", "min(balance)", "accounts",
       {"balance > 900", "branch IN (SELECT name FROM branches WHERE region = 'eu')",
        "status = 'active'"},
       "branch", "", "branch", ""},
      {"a17", "accounts", "For active accounts under 2600 opened since 2019, what is the highest balance per branch?",
       "branch", "max(balance)", "accounts",
       {"balance < 2600", "status = 'active'", "opened >= '2019-01-01'"}, "branch", "", "branch",
       ""},
      {"a18", "accounts", "Above 500, what is the lowest active balance in each branch?",
       "branch", "min(balance)", "accounts", {"balance > 500", "status = 'active'"}, "branch", "",
       "branch", ""},
      // transactions
      {"t01", "transactions", "Ignoring fees, what is the largest amount per transaction kind?",
       "kind", "max(amount)", "transactions", {"kind <> 'fee'"}, "kind", "", "kind", ""},
      {"t02", "transactions", "For deposits, what is the smallest amount per kind?",
       "kind", "min(amount)", "transactions", {"kind = 'deposit'"}, "kind", "", "kind", ""},
      {"t03", "transactions", "Under 1400 and since March 2023, what is the largest amount per kind?",
       "kind", "max(amount)", "transactions", {"amount < 1400", "ts >= '2023-03-01'"}, "kind", "",
       "kind", ""},
      {"t04", "transactions", "Above 300 on the first six accounts, what is the smallest amount per kind, reversed?",
       "kind", "min(amount)", "transactions", {"amount > 300", "account_id <= 6"}, "kind", "",
       "kind DESC", ""},
      {"t05", "transactions", "Outside west-branch accounts, what is the largest transaction per branch?",
       "accounts.branch", "max(transactions.amount)",
       "transactions JOIN accounts ON transactions.account_id = accounts.id",
       {"accounts.branch <> 'west'"}, "accounts.branch", "", "accounts.branch", ""},
      {"t06", "transactions", "For deposits above 400, what is the smallest amount per branch?",
       "accounts.branch", "min(transactions.amount)",
       "transactions JOIN accounts ON transactions.account_id = accounts.id",
       {"transactions.amount > 400", "transactions.kind = 'deposit'"}, "accounts.branch", "",
       "accounts.branch", ""},
      {"t07", "transactions", "Under 1000 on the first five accounts, what is the largest amount per kind?",
       "kind", "max(amount)", "transactions", {"amount < 1000", "account_id <= 5"}, "kind", "",
       "kind", ""},
      {"t08", "transactions", "Above 700 and excluding fees, what is the smallest amount per account, by account descending?",
       "account_id", "min(amount)", "transactions", {"amount > 700", "kind <> 'fee'"},
       "account_id", "", "account_id DESC", ""},
      {"t09", "transactions", "For accounts outside north, what is the largest amount per kind?",
       "kind", "max(amount)", "transactions",
       {"account_id IN (SELECT id FROM accounts WHERE branch <> 'north')"}, "kind", "", "kind",
       ""},
      {"t10", "transactions", "Above 350 on south-branch accounts, what is the smallest amount per kind?",
       "kind", "min(amount)", "transactions",
       {"amount > 350", "account_id IN (SELECT id FROM accounts WHERE branch = 'south')"}, "kind",
       "", "kind", ""},
      {"t11", "transactions", "Under 1500, what is the largest amount per account having at least three such transactions?",
       "account_id", "max(amount)", "transactions", {"amount < 1500"}, "account_id",
       "count(*) >= 3", "account_id", ""},
      {"t12", "transactions", "Skipping withdrawals since February 2023, what is the smallest amount per kind with at least two rows?",
       "kind", "min(amount)", "transactions", {"kind <> 'withdrawal'", "ts >= '2023-02-01'"},
       "kind", "count(*) >= 2", "kind", ""},
      {"t13", "transactions", "Ignoring deposits, list two kinds by name with their largest amount.",
       "kind", "max(amount)", "transactions", {"kind <> 'deposit'"}, "kind", "", "kind", "2"},
      {"t14", "transactions", "Above 250, list the first four accounts with their smallest amount.",
       "account_id", "min(amount)", "transactions", {"amount > 250"}, "account_id", "",
       "account_id", "4"},
      {"t15", "transactions", "For deposits above 100 on accounts up to seven, what is the largest amount per kind?",
       "kind", "max(amount)", "transactions",
       {"kind = 'deposit'", "amount > 100", "account_id <= 7"}, "kind", "", "kind", ""},
      {"t16", "transactions", "Above 500, excluding fees, since February 2023: smallest amount per account?",
       "account_id", "min(amount)", "transactions",
       {"amount > 500", "kind <> 'fee'", "ts >= '2023-02-01'"}, "account_id", "", "account_id",
       ""},
      {"t17", "transactions", "Under 1200 and ignoring fees, what is the largest amount per branch, reversed?",
       "accounts.branch", "max(transactions.amount)",
       "transactions JOIN accounts ON transactions.account_id = accounts.id",
       {"transactions.amount < 1200", "transactions.kind <> 'fee'"}, "accounts.branch", "",
       "accounts.branch DESC", ""},
      {"t18", "transactions", "Under 800 outside east-branch accounts, what is the largest amount per kind?",
       "kind", "max(amount)", "transactions",
       {"amount < 800", "account_id IN (SELECT id FROM accounts WHERE branch <> 'east')"}, "kind",
       "", "kind", ""},
      // loans
      {"l01", "loans", "Excluding defaulted loans, what is the largest principal per status?",
       "status", "max(principal)", "loans", {"status <> 'defaulted'"}, "status", "", "status", ""},
      {"l02", "loans", "For open loans, what is the smallest principal per status?",
       "status", "min(principal)", "loans", {"status = 'open'"}, "status", "", "status", ""},
      {"l03", "loans", "Under 90000 with terms of two years or more, what is the largest principal per status?",
       "status", "max(principal)", "loans", {"principal < 90000", "term >= 24"}, "status", "",
       "status", ""},
      {"l04", "loans", "Above 30000 with rates under 6.5, what is the smallest principal per status, reversed?",
       "status", "min(principal)", "loans", {"principal > 30000", "rate < 6.5"}, "status", "",
       "status DESC", ""},
      {"l05", "loans", "For retail borrowers only, what is the largest principal per segment?",
       "borrowers.segment", "max(loans.principal)",
       "loans JOIN borrowers ON loans.borrower_id = borrowers.id",
       {"borrowers.segment <> 'corporate'"}, "borrowers.segment", "", "borrowers.segment", ""},
      {"l06", "loans", "For open loans with rates above 3.5, what is the lowest rate per segment?",
       "borrowers.segment", "min(loans.rate)",
       "loans JOIN borrowers ON loans.borrower_id = borrowers.id",
       {"loans.rate > 3.5", "loans.status = 'open'"}, "borrowers.segment", "",
       "borrowers.segment", ""},
      {"l07", "loans", "Under a rate of 6.0 with terms of two years or more, what is the top rate per status?",
       "status", "max(rate)", "loans", {"rate < 6.0", "term >= 24"}, "status", "", "status", ""},
      {"l08", "loans", "Above 50000 and not closed, what is the smallest principal per status?",
       "status", "min(principal)", "loans", {"principal > 50000", "status <> 'closed'"}, "status",
       "", "status", ""},
      {"l09", "loans", "For retail borrowers, what is the largest principal per loan status?",
       "status", "max(principal)", "loans",
       {"borrower_id IN (SELECT id FROM borrowers WHERE segment = 'retail')"}, "status", "",
       "status", ""},
      {"l10", "loans", "Above a rate of 3.0 for corporate borrowers, what is the lowest rate per status?",
       "status", "min(rate)", "loans",
       {"rate > 3.0", "borrower_id IN (SELECT id FROM borrowers WHERE segment = 'corporate')"},
       "status", "", "status", ""},
      {"l11", "loans", "Under 95000, what is the largest principal per term with at least two loans?",
       "term", "max(principal)", "loans", {"principal < 95000"}, "term", "count(*) >= 2", "term",
       ""},
      {"l12", "loans", "Not closed and at least two years long, what is the smallest principal per status with two or more loans?",
       "status", "min(principal)", "loans", {"status <> 'closed'", "term >= 24"}, "status",
       "count(*) >= 2", "status", ""},
      {"l13", "loans", "Excluding open loans, list two statuses in reverse order with their top rate.",
       "status", "max(rate)", "loans", {"status <> 'open'"}, "status", "", "status DESC", "2"},
      {"l14", "loans", "Above 20000, list the three shortest terms with their smallest principal.",
       "term", "min(principal)", "loans", {"principal > 20000"}, "term", "", "term", "3"},
      {"l15", "loans", "Under 80000 at rates below 6.8 with terms from a year, what is the largest principal per status?",
       "status", "max(principal)", "loans", {"principal < 80000", "rate < 6.8", "term >= 12"},
       "status", "", "status", ""},
      {"l16", "loans", "Above a 3.2 rate, not defaulted, over 15000: lowest rate per status?",
       "status", "min(rate)", "loans",
       {"rate > 3.2", "status <> 'defaulted'", "principal > 15000"}, "status", "", "status", ""},
      {"l17", "loans", "For open loans, what is the largest principal per segment with at least two loans?",
       "borrowers.segment", "max(loans.principal)",
       "loans JOIN borrowers ON loans.borrower_id = borrowers.id", {"loans.status = 'open'"},
       "borrowers.segment", "count(*) >= 2", "borrowers.segment", ""},
      {"l18", "loans", "Above a rate of 4.0 on open loans, what is the lowest rate per term?",
       "term", "min(rate)", "loans", {"rate > 4.0", "status = 'open'"}, "term", "", "term", ""},
  };
  return recipes;
}

inline finch::Corpus fixture_corpus() {
  finch::Corpus corpus;
  for (const auto& r : fixture_recipes()) {
    finch::NlSqlPair pair;
    pair.id = r.id;
    pair.db_id = r.db_id;
    pair.question = r.question;
    pair.query = recipe_sql(r);
    corpus.add(pair);
  }
  return corpus;
}

inline uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path.string());
  uint64_t hash = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

// Runs a shell command, returns its exit status (-1 if it died on a signal).
inline int run_command(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -1;
}

}  // namespace fixtures
