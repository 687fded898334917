#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace finch::sql {

struct SelectStmt;
using SelectPtr = std::unique_ptr<SelectStmt>;

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind {
  NumberLit,       // text = canonical spelling
  StringLit,       // text = unescaped content
  BlobLit,         // text = lowercase hex
  NullLit,
  Column,          // text = column name, text2 = qualifier ("" if none)
  Star,            // text2 = qualifier ("" for bare *)
  Unary,           // text = "-" | "+" | "~" | "not", args[0]
  Binary,          // text = operator spelling, args[0], args[1]
  FuncCall,        // text = function name, args; star_arg/distinct flags; window
  Cast,            // args[0], text2 = target type
  CaseExpr,        // optional operand, when/then pairs, optional else (see flags)
  InList,          // args[0] = lhs, args[1..] = list items; negated flag
  InSelect,        // args[0] = lhs, select; negated flag
  InTable,         // args[0] = lhs, text2 = table name; negated flag
  Between,         // args[0..2]; negated flag
  Exists,          // select; negated flag
  ScalarSubquery,  // select
  Collate,         // args[0], text2 = collation name
};

struct OrderTerm;

struct WindowSpec {
  std::vector<ExprPtr> partition_by;
  std::vector<OrderTerm> order_by;
  std::string frame;  // canonicalized frame clause text, may be empty
};

struct Expr {
  ExprKind kind;
  std::string text;
  std::string text2;
  bool negated = false;      // NOT IN / NOT BETWEEN / NOT EXISTS / NOT LIKE family
  bool distinct = false;     // aggregate DISTINCT
  bool star_arg = false;     // count(*)
  bool case_has_operand = false;
  bool case_has_else = false;
  std::vector<ExprPtr> args;
  SelectPtr select;
  std::unique_ptr<WindowSpec> window;

  explicit Expr(ExprKind k) : kind(k) {}
  ExprPtr clone() const;
};

struct OrderTerm {
  ExprPtr expr;
  int dir = 0;    // 0 unspecified, 1 asc, 2 desc
  int nulls = 0;  // 0 unspecified, 1 first, 2 last
};

struct ResultColumn {
  ExprPtr expr;               // null when star
  std::string alias;          // dropped during normalization
  bool star = false;
  std::string star_qualifier; // for t.*
};

enum class JoinKind {
  First,  // leading table in FROM
  Comma,
  Inner,
  Left,
  Right,
  Full,
  Cross,
};

struct TableRef {
  std::string table;    // base name; empty when derived
  std::string schema;   // optional db qualifier, dropped during normalization
  std::string alias;
  SelectPtr subquery;   // derived table
};

struct FromItem {
  TableRef ref;
  JoinKind join = JoinKind::First;
  bool natural = false;
  ExprPtr on;
  std::vector<std::string> using_cols;
};

struct SelectCore {
  bool distinct = false;
  std::vector<ResultColumn> columns;
  std::vector<FromItem> from;
  ExprPtr where;
  std::vector<ExprPtr> group_by;
  ExprPtr having;
};

enum class CompoundOp { Union, UnionAll, Intersect, Except };

struct Cte {
  std::string name;
  std::vector<std::string> columns;
  SelectPtr select;
};

struct SelectStmt {
  std::vector<Cte> ctes;
  bool recursive = false;
  SelectCore core;
  std::vector<std::pair<CompoundOp, SelectCore>> compounds;
  std::vector<OrderTerm> order_by;
  ExprPtr limit;
  ExprPtr offset;

  SelectPtr clone() const;
};

namespace detail {

inline std::vector<ExprPtr> clone_all(const std::vector<ExprPtr>& v) {
  std::vector<ExprPtr> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(e ? e->clone() : nullptr);
  return out;
}

inline std::vector<OrderTerm> clone_terms(const std::vector<OrderTerm>& v) {
  std::vector<OrderTerm> out;
  out.reserve(v.size());
  for (const auto& t : v) out.push_back({t.expr ? t.expr->clone() : nullptr, t.dir, t.nulls});
  return out;
}

inline SelectCore clone_core(const SelectCore& c) {
  SelectCore out;
  out.distinct = c.distinct;
  for (const auto& rc : c.columns) {
    ResultColumn col;
    col.expr = rc.expr ? rc.expr->clone() : nullptr;
    col.alias = rc.alias;
    col.star = rc.star;
    col.star_qualifier = rc.star_qualifier;
    out.columns.push_back(std::move(col));
  }
  for (const auto& fi : c.from) {
    FromItem item;
    item.ref.table = fi.ref.table;
    item.ref.schema = fi.ref.schema;
    item.ref.alias = fi.ref.alias;
    item.ref.subquery = fi.ref.subquery ? fi.ref.subquery->clone() : nullptr;
    item.join = fi.join;
    item.natural = fi.natural;
    item.on = fi.on ? fi.on->clone() : nullptr;
    item.using_cols = fi.using_cols;
    out.from.push_back(std::move(item));
  }
  out.where = c.where ? c.where->clone() : nullptr;
  out.group_by = clone_all(c.group_by);
  out.having = c.having ? c.having->clone() : nullptr;
  return out;
}

}  // namespace detail

inline ExprPtr Expr::clone() const {
  auto out = std::make_unique<Expr>(kind);
  out->text = text;
  out->text2 = text2;
  out->negated = negated;
  out->distinct = distinct;
  out->star_arg = star_arg;
  out->case_has_operand = case_has_operand;
  out->case_has_else = case_has_else;
  out->args = detail::clone_all(args);
  out->select = select ? select->clone() : nullptr;
  if (window) {
    out->window = std::make_unique<WindowSpec>();
    out->window->partition_by = detail::clone_all(window->partition_by);
    out->window->order_by = detail::clone_terms(window->order_by);
    out->window->frame = window->frame;
  }
  return out;
}

inline SelectPtr SelectStmt::clone() const {
  auto out = std::make_unique<SelectStmt>();
  out->recursive = recursive;
  for (const auto& c : ctes)
    out->ctes.push_back({c.name, c.columns, c.select ? c.select->clone() : nullptr});
  out->core = detail::clone_core(core);
  for (const auto& [op, core2] : compounds) out->compounds.emplace_back(op, detail::clone_core(core2));
  out->order_by = detail::clone_terms(order_by);
  out->limit = limit ? limit->clone() : nullptr;
  out->offset = offset ? offset->clone() : nullptr;
  return out;
}

}  // namespace finch::sql
