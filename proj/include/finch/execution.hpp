#pragma once

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "finch/util.hpp"

namespace finch {

enum class ErrorClass {
  SYNTAX_ERROR,
  UNKNOWN_COLUMN,
  UNKNOWN_TABLE,
  INCOMPLETE_QUERY,
  UNRECOGNIZED_TOKEN,
  TIMEOUT,
  OTHER
};

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::SYNTAX_ERROR: return "SYNTAX_ERROR";
    case ErrorClass::UNKNOWN_COLUMN: return "UNKNOWN_COLUMN";
    case ErrorClass::UNKNOWN_TABLE: return "UNKNOWN_TABLE";
    case ErrorClass::INCOMPLETE_QUERY: return "INCOMPLETE_QUERY";
    case ErrorClass::UNRECOGNIZED_TOKEN: return "UNRECOGNIZED_TOKEN";
    case ErrorClass::TIMEOUT: return "TIMEOUT";
    case ErrorClass::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline ErrorClass error_class_from_name(std::string_view s) {
  if (s == "SYNTAX_ERROR") return ErrorClass::SYNTAX_ERROR;
  if (s == "UNKNOWN_COLUMN") return ErrorClass::UNKNOWN_COLUMN;
  if (s == "UNKNOWN_TABLE") return ErrorClass::UNKNOWN_TABLE;
  if (s == "INCOMPLETE_QUERY") return ErrorClass::INCOMPLETE_QUERY;
  if (s == "UNRECOGNIZED_TOKEN") return ErrorClass::UNRECOGNIZED_TOKEN;
  if (s == "TIMEOUT") return ErrorClass::TIMEOUT;
  return ErrorClass::OTHER;
}

// Deterministic pattern rules over the engine (or parser) diagnostic text.
// Specific patterns win over the generic "syntax error" catch-all.
inline ErrorClass classify_error(std::string_view diagnostic) {
  std::string d = to_lower(diagnostic);
  if (d.find("no such column") != std::string::npos) return ErrorClass::UNKNOWN_COLUMN;
  if (d.find("no such table") != std::string::npos) return ErrorClass::UNKNOWN_TABLE;
  if (d.find("incomplete input") != std::string::npos) return ErrorClass::INCOMPLETE_QUERY;
  if (d.find("unrecognized token") != std::string::npos) return ErrorClass::UNRECOGNIZED_TOKEN;
  if (d.find("interrupt") != std::string::npos) return ErrorClass::TIMEOUT;
  if (d.find("syntax error") != std::string::npos) return ErrorClass::SYNTAX_ERROR;
  return ErrorClass::OTHER;
}

struct DbError : std::runtime_error {
  explicit DbError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Value {
  enum class Type { Null, Int, Real, Text, Blob };
  Type type = Type::Null;
  int64_t i = 0;
  double d = 0.0;
  std::string s;

  static Value null() { return {}; }
  static Value integer(int64_t v) { return {Type::Int, v, 0.0, {}}; }
  static Value real(double v) { return {Type::Real, 0, v, {}}; }
  static Value text(std::string v) { return {Type::Text, 0, 0.0, std::move(v)}; }
  static Value blob(std::string hex) { return {Type::Blob, 0, 0.0, std::move(hex)}; }

  bool is_numeric() const { return type == Type::Int || type == Type::Real; }
  double as_double() const { return type == Type::Int ? static_cast<double>(i) : d; }
};

using Row = std::vector<Value>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

struct ExecutionOutcome {
  bool ok = false;
  ResultTable table;
  ErrorClass error_class = ErrorClass::OTHER;
  std::string diagnostic;
  double elapsed_ms = 0.0;
};

inline std::string db_path(const std::string& root, const std::string& db_id) {
  return root + "/" + db_id + "/" + db_id + ".sqlite";
}

namespace detail {

inline int readonly_authorizer(void*, int action, const char*, const char*, const char*,
                               const char*) {
  switch (action) {
    case SQLITE_SELECT:
    case SQLITE_READ:
    case SQLITE_FUNCTION:
    case SQLITE_RECURSIVE:
      return SQLITE_OK;
    default:
      return SQLITE_DENY;
  }
}

struct Deadline {
  std::chrono::steady_clock::time_point at;
};

inline int deadline_hook(void* p) {
  return std::chrono::steady_clock::now() > static_cast<Deadline*>(p)->at ? 1 : 0;
}

inline std::string to_hex(const unsigned char* data, int n) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(static_cast<size_t>(n) * 2);
  for (int i = 0; i < n; ++i) {
    out += kHex[data[i] >> 4];
    out += kHex[data[i] & 0xF];
  }
  return out;
}

}  // namespace detail

// One read-only connection to one database file. Not shareable across
// threads; each worker opens its own.
class Database {
 public:
  Database() = default;
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;
  Database(Database&& other) noexcept : db_(other.db_), db_id_(std::move(other.db_id_)) {
    other.db_ = nullptr;
  }
  Database& operator=(Database&& other) noexcept {
    if (this != &other) {
      close();
      db_ = other.db_;
      db_id_ = std::move(other.db_id_);
      other.db_ = nullptr;
    }
    return *this;
  }
  ~Database() { close(); }

  static Database open(const std::string& root, const std::string& db_id) {
    return open_path(db_path(root, db_id), db_id);
  }

  static Database open_path(const std::string& path, const std::string& db_id = "") {
    Database d;
    d.db_id_ = db_id;
    int rc = sqlite3_open_v2(path.c_str(), &d.db_, SQLITE_OPEN_READONLY, nullptr);
    if (rc != SQLITE_OK) {
      std::string msg = d.db_ ? sqlite3_errmsg(d.db_) : "out of memory";
      d.close();
      throw DbError("cannot open database " + path + ": " + msg);
    }
    return d;
  }

  bool valid() const { return db_ != nullptr; }
  const std::string& id() const { return db_id_; }
  sqlite3* raw() const { return db_; }

  ExecutionOutcome execute(std::string_view sql, int timeout_ms = 30000) {
    if (!db_) throw DbError("execute on closed database handle");
    auto started = std::chrono::steady_clock::now();
    ExecutionOutcome out;
    auto finish = [&] {
      out.elapsed_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
      sqlite3_set_authorizer(db_, nullptr, nullptr);
      sqlite3_progress_handler(db_, 0, nullptr, nullptr);
      return out;
    };
    auto error_out = [&](std::string diag) {
      out.ok = false;
      out.diagnostic = std::move(diag);
      out.error_class = classify_error(out.diagnostic);
      return finish();
    };

    sqlite3_set_authorizer(db_, detail::readonly_authorizer, nullptr);
    std::string text(sql);
    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db_, text.c_str(), -1, &stmt, &tail);
    if (rc != SQLITE_OK) {
      if (stmt) sqlite3_finalize(stmt);
      return error_out(sqlite3_errmsg(db_));
    }
    if (!stmt) return error_out("incomplete input");
    for (const char* p = tail; p && *p; ++p) {
      if (!is_space(*p) && *p != ';') {
        sqlite3_finalize(stmt);
        return error_out("multi-statement input is not permitted");
      }
    }
    if (!sqlite3_stmt_readonly(stmt)) {
      sqlite3_finalize(stmt);
      return error_out("write statements are not permitted");
    }

    detail::Deadline deadline{started + std::chrono::milliseconds(timeout_ms)};
    sqlite3_progress_handler(db_, 500, detail::deadline_hook, &deadline);

    int ncol = sqlite3_column_count(stmt);
    for (int c = 0; c < ncol; ++c) {
      const char* name = sqlite3_column_name(stmt, c);
      out.table.columns.push_back(name ? name : "");
    }
    for (;;) {
      rc = sqlite3_step(stmt);
      if (rc == SQLITE_ROW) {
        Row row;
        row.reserve(static_cast<size_t>(ncol));
        for (int c = 0; c < ncol; ++c) {
          switch (sqlite3_column_type(stmt, c)) {
            case SQLITE_INTEGER:
              row.push_back(Value::integer(sqlite3_column_int64(stmt, c)));
              break;
            case SQLITE_FLOAT:
              row.push_back(Value::real(sqlite3_column_double(stmt, c)));
              break;
            case SQLITE_TEXT: {
              const unsigned char* t = sqlite3_column_text(stmt, c);
              int n = sqlite3_column_bytes(stmt, c);
              row.push_back(Value::text(std::string(reinterpret_cast<const char*>(t),
                                                    static_cast<size_t>(n))));
              break;
            }
            case SQLITE_BLOB: {
              auto* b = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, c));
              int n = sqlite3_column_bytes(stmt, c);
              row.push_back(Value::blob(detail::to_hex(b, n)));
              break;
            }
            default:
              row.push_back(Value::null());
          }
        }
        out.table.rows.push_back(std::move(row));
        continue;
      }
      if (rc == SQLITE_DONE) {
        out.ok = true;
        sqlite3_finalize(stmt);
        return finish();
      }
      std::string diag = sqlite3_errmsg(db_);
      sqlite3_finalize(stmt);
      return error_out(std::move(diag));
    }
  }

  // Catalog reads (sqlite_master, PRAGMA table_info/foreign_key_list) for
  // trusted internal SQL only; skips the authorizer that execute() installs.
  std::vector<Row> catalog_query(std::string_view sql) const {
    if (!db_) throw DbError("catalog_query on closed database handle");
    std::string text(sql);
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db_, text.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
      std::string msg = sqlite3_errmsg(db_);
      if (stmt) sqlite3_finalize(stmt);
      throw DbError("catalog query failed: " + msg);
    }
    std::vector<Row> rows;
    int ncol = sqlite3_column_count(stmt);
    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
      Row row;
      for (int c = 0; c < ncol; ++c) {
        switch (sqlite3_column_type(stmt, c)) {
          case SQLITE_INTEGER:
            row.push_back(Value::integer(sqlite3_column_int64(stmt, c)));
            break;
          case SQLITE_FLOAT:
            row.push_back(Value::real(sqlite3_column_double(stmt, c)));
            break;
          case SQLITE_TEXT: {
            const unsigned char* t = sqlite3_column_text(stmt, c);
            int n = sqlite3_column_bytes(stmt, c);
            row.push_back(
                Value::text(std::string(reinterpret_cast<const char*>(t), static_cast<size_t>(n))));
            break;
          }
          default:
            row.push_back(Value::null());
        }
      }
      rows.push_back(std::move(row));
    }
    std::string msg = rc == SQLITE_DONE ? "" : sqlite3_errmsg(db_);
    sqlite3_finalize(stmt);
    if (rc != SQLITE_DONE) throw DbError("catalog query failed: " + msg);
    return rows;
  }

 private:
  void close() {
    if (db_) {
      sqlite3_close(db_);
      db_ = nullptr;
    }
  }

  sqlite3* db_ = nullptr;
  std::string db_id_;
};

// Cell-wise tolerance rule: numeric cells pass when |a - b| <= tau * max(1, |b|)
// with the gold value b in the denominator role; everything else needs exact
// equality. NULL matches only NULL.
inline bool cells_match(const Value& pred, const Value& gold, double tau) {
  if (pred.type == Value::Type::Null || gold.type == Value::Type::Null)
    return pred.type == Value::Type::Null && gold.type == Value::Type::Null;
  if (pred.is_numeric() && gold.is_numeric()) {
    if (pred.type == Value::Type::Int && gold.type == Value::Type::Int && pred.i == gold.i)
      return true;
    double a = pred.as_double(), b = gold.as_double();
    return std::abs(a - b) <= tau * std::max(1.0, std::abs(b));
  }
  if (pred.type != gold.type) return false;
  return pred.s == gold.s;
}

namespace detail {

inline int type_rank(const Value& v) {
  switch (v.type) {
    case Value::Type::Null: return 0;
    case Value::Type::Int:
    case Value::Type::Real: return 1;
    case Value::Type::Text: return 2;
    case Value::Type::Blob: return 3;
  }
  return 4;
}

inline bool row_less(const Row& a, const Row& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    int ra = type_rank(a[i]), rb = type_rank(b[i]);
    if (ra != rb) return ra < rb;
    if (ra == 1) {
      double da = a[i].as_double(), db = b[i].as_double();
      if (da != db) return da < db;
      if (a[i].type != b[i].type) return a[i].type == Value::Type::Int;
      continue;
    }
    if (ra == 2 || ra == 3) {
      if (a[i].s != b[i].s) return a[i].s < b[i].s;
    }
  }
  return a.size() < b.size();
}

}  // namespace detail

// Binary tolerance-gated result comparison. order_sensitive should be set
// when the gold query carries ORDER BY; otherwise both sides are aligned by a
// canonical row sort before the cell-wise check.
inline int execution_similarity(const ExecutionOutcome& pred, const ExecutionOutcome& gold,
                                double tau, bool order_sensitive) {
  if (!gold.ok || !pred.ok) return 0;
  if (pred.table.columns.size() != gold.table.columns.size()) return 0;
  if (pred.table.rows.size() != gold.table.rows.size()) return 0;
  if (gold.table.rows.empty()) return 1;
  const std::vector<Row>* pr = &pred.table.rows;
  const std::vector<Row>* gr = &gold.table.rows;
  std::vector<Row> ps, gs;
  if (!order_sensitive) {
    ps = pred.table.rows;
    gs = gold.table.rows;
    std::sort(ps.begin(), ps.end(), detail::row_less);
    std::sort(gs.begin(), gs.end(), detail::row_less);
    pr = &ps;
    gr = &gs;
  }
  for (size_t r = 0; r < gr->size(); ++r) {
    const Row& rp = (*pr)[r];
    const Row& rg = (*gr)[r];
    if (rp.size() != rg.size()) return 0;
    for (size_t c = 0; c < rg.size(); ++c) {
      if (!cells_match(rp[c], rg[c], tau)) return 0;
    }
  }
  return 1;
}

}  // namespace finch
