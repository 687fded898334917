#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>
#include <string>

#include "finch/sql/ast.hpp"
#include "finch/util.hpp"

namespace finch::sql {

// Canonical text renderer. Parenthesizes only where precedence demands it, so
// redundant parentheses in the input vanish. Rendering a parsed query and
// re-parsing the output yields a structurally identical tree.

inline bool ident_needs_quote(const std::string& s) {
  if (s.empty()) return true;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return true;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) return true;
  }
  static const std::set<std::string> kReserved = {
      "select", "from",  "where",  "group",   "having",    "order",  "limit",  "offset",
      "on",     "using", "join",   "natural", "left",      "right",  "full",   "inner",
      "cross",  "outer", "union",  "intersect", "except",  "as",     "and",    "or",
      "not",    "when",  "then",   "else",    "end",       "case",   "collate", "asc",
      "desc",   "is",    "in",     "like",    "glob",      "between", "escape", "isnull",
      "notnull", "regexp", "match", "nulls",  "by",        "distinct", "all",  "exists",
      "cast",   "null",  "true",   "false",   "with",      "recursive"};
  return kReserved.count(s) > 0;
}

inline std::string quote_ident(const std::string& s) {
  if (!ident_needs_quote(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline int binop_prec(std::string_view op) {
  if (op == "or") return 1;
  if (op == "and") return 2;
  if (op == "=" || op == "!=" || op == "is" || op == "is not" || op == "like" ||
      op == "not like" || op == "glob" || op == "not glob" || op == "regexp" ||
      op == "not regexp" || op == "match" || op == "not match")
    return 4;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 5;
  if (op == "&" || op == "|" || op == "<<" || op == ">>") return 7;
  if (op == "+" || op == "-") return 8;
  if (op == "*" || op == "/" || op == "%") return 9;
  if (op == "||" || op == "->" || op == "->>") return 10;
  return 4;
}

inline int expr_prec(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary:
      return binop_prec(e.text);
    case ExprKind::Unary:
      return e.text == "not" ? 3 : 12;
    case ExprKind::Between:
    case ExprKind::InList:
    case ExprKind::InSelect:
    case ExprKind::InTable:
      return 4;
    case ExprKind::Collate:
      return 11;
    default:
      return 100;
  }
}

// Numeric literals compare by value: 1.0, 1, and 0x1 all render as "1".
inline std::string render_number(const std::string& text) {
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    auto v = static_cast<int64_t>(std::strtoull(text.c_str() + 2, nullptr, 16));
    return std::to_string(v);
  }
  int64_t iv = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), iv);
  if (ec == std::errc() && p == text.data() + text.size()) return std::to_string(iv);
  return canonical_number(std::strtod(text.c_str(), nullptr));
}

inline std::string render_string_literal(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  out += '\'';
  return out;
}

std::string render_select(const SelectStmt& stmt);

inline std::string render_expr(const Expr& e);

inline std::string render_child(const Expr& c, int min_prec) {
  std::string s = render_expr(c);
  if (expr_prec(c) < min_prec) return "(" + s + ")";
  return s;
}

inline std::string render_order_term(const OrderTerm& t) {
  std::string s = render_expr(*t.expr);
  if (t.dir == 2) s += " desc";
  if (t.nulls == 1) s += " nulls first";
  else if (t.nulls == 2) s += " nulls last";
  return s;
}

inline std::string render_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::NumberLit:
      return render_number(e.text);
    case ExprKind::StringLit:
      return render_string_literal(e.text);
    case ExprKind::BlobLit:
      return "x'" + e.text + "'";
    case ExprKind::NullLit:
      return "null";
    case ExprKind::Column:
      return e.text2.empty() ? quote_ident(e.text) : quote_ident(e.text2) + "." + quote_ident(e.text);
    case ExprKind::Star:
      return e.text2.empty() ? "*" : quote_ident(e.text2) + ".*";
    case ExprKind::Unary: {
      std::string arg = render_child(*e.args[0], 12);
      if (e.text == "not") return "not " + render_child(*e.args[0], 4);
      if (e.text == "-" && !arg.empty() && arg[0] == '-') return "- " + arg;
      return e.text + arg;
    }
    case ExprKind::Binary: {
      int p = binop_prec(e.text);
      // and/or/|| are associative, so a right-nested chain renders flat
      bool assoc = e.text == "and" || e.text == "or" || e.text == "||";
      const Expr& rhs = *e.args[1];
      int rhs_min = (assoc && rhs.kind == ExprKind::Binary && rhs.text == e.text) ? p : p + 1;
      std::string s = render_child(*e.args[0], p) + " " + e.text + " " + render_child(rhs, rhs_min);
      if (e.args.size() > 2) s += " escape " + render_child(*e.args[2], p + 1);
      return s;
    }
    case ExprKind::FuncCall: {
      std::string s = e.text + "(";
      if (e.star_arg) {
        s += "*";
      } else {
        if (e.distinct) s += "distinct ";
        for (size_t i = 0; i < e.args.size(); ++i) {
          if (i) s += ", ";
          s += render_expr(*e.args[i]);
        }
      }
      s += ")";
      if (e.window) {
        s += " over (";
        std::string inner;
        if (!e.window->partition_by.empty()) {
          inner += "partition by ";
          for (size_t i = 0; i < e.window->partition_by.size(); ++i) {
            if (i) inner += ", ";
            inner += render_expr(*e.window->partition_by[i]);
          }
        }
        if (!e.window->order_by.empty()) {
          if (!inner.empty()) inner += " ";
          inner += "order by ";
          for (size_t i = 0; i < e.window->order_by.size(); ++i) {
            if (i) inner += ", ";
            inner += render_order_term(e.window->order_by[i]);
          }
        }
        if (!e.window->frame.empty()) {
          if (!inner.empty()) inner += " ";
          inner += e.window->frame;
        }
        s += inner + ")";
      }
      return s;
    }
    case ExprKind::Cast:
      return "cast(" + render_expr(*e.args[0]) + " as " + e.text2 + ")";
    case ExprKind::CaseExpr: {
      std::string s = "case";
      size_t i = e.case_has_operand ? 1 : 0;
      size_t end = e.args.size() - (e.case_has_else ? 1 : 0);
      if (e.case_has_operand) s += " " + render_expr(*e.args[0]);
      for (; i + 2 <= end; i += 2)
        s += " when " + render_expr(*e.args[i]) + " then " + render_expr(*e.args[i + 1]);
      if (e.case_has_else) s += " else " + render_expr(*e.args.back());
      s += " end";
      return s;
    }
    case ExprKind::InList: {
      std::string s = render_child(*e.args[0], 4);
      if (e.negated) s += " not";
      s += " in (";
      for (size_t i = 1; i < e.args.size(); ++i) {
        if (i > 1) s += ", ";
        s += render_expr(*e.args[i]);
      }
      return s + ")";
    }
    case ExprKind::InSelect: {
      std::string s = render_child(*e.args[0], 4);
      if (e.negated) s += " not";
      return s + " in (" + render_select(*e.select) + ")";
    }
    case ExprKind::InTable: {
      std::string s = render_child(*e.args[0], 4);
      if (e.negated) s += " not";
      return s + " in " + quote_ident(e.text2);
    }
    case ExprKind::Between: {
      std::string s = render_child(*e.args[0], 4);
      if (e.negated) s += " not";
      return s + " between " + render_child(*e.args[1], 5) + " and " + render_child(*e.args[2], 5);
    }
    case ExprKind::Exists:
      return "exists (" + render_select(*e.select) + ")";
    case ExprKind::ScalarSubquery:
      return "(" + render_select(*e.select) + ")";
    case ExprKind::Collate:
      return render_child(*e.args[0], 11) + " collate " + e.text2;
  }
  return "";
}

inline std::string render_table_ref(const TableRef& ref) {
  std::string s;
  if (ref.subquery) {
    s = "(" + render_select(*ref.subquery) + ")";
  } else {
    s = ref.schema.empty() ? quote_ident(ref.table)
                           : quote_ident(ref.schema) + "." + quote_ident(ref.table);
  }
  if (!ref.alias.empty()) s += " as " + quote_ident(ref.alias);
  return s;
}

inline std::string render_core(const SelectCore& core) {
  std::string s = "select ";
  if (core.distinct) s += "distinct ";
  for (size_t i = 0; i < core.columns.size(); ++i) {
    if (i) s += ", ";
    const ResultColumn& col = core.columns[i];
    if (col.star) {
      s += col.star_qualifier.empty() ? "*" : quote_ident(col.star_qualifier) + ".*";
    } else {
      s += render_expr(*col.expr);
      if (!col.alias.empty()) s += " as " + quote_ident(col.alias);
    }
  }
  if (!core.from.empty()) {
    s += " from ";
    for (size_t i = 0; i < core.from.size(); ++i) {
      const FromItem& item = core.from[i];
      if (i == 0) {
        s += render_table_ref(item.ref);
        continue;
      }
      if (item.join == JoinKind::Comma) {
        s += ", " + render_table_ref(item.ref);
        continue;
      }
      s += " ";
      if (item.natural) s += "natural ";
      switch (item.join) {
        case JoinKind::Left: s += "left join "; break;
        case JoinKind::Right: s += "right join "; break;
        case JoinKind::Full: s += "full join "; break;
        case JoinKind::Cross: s += "cross join "; break;
        default: s += "join "; break;
      }
      s += render_table_ref(item.ref);
      if (item.on) {
        s += " on " + render_expr(*item.on);
      } else if (!item.using_cols.empty()) {
        s += " using (";
        for (size_t j = 0; j < item.using_cols.size(); ++j) {
          if (j) s += ", ";
          s += quote_ident(item.using_cols[j]);
        }
        s += ")";
      }
    }
  }
  if (core.where) s += " where " + render_expr(*core.where);
  if (!core.group_by.empty()) {
    s += " group by ";
    for (size_t i = 0; i < core.group_by.size(); ++i) {
      if (i) s += ", ";
      s += render_expr(*core.group_by[i]);
    }
  }
  if (core.having) s += " having " + render_expr(*core.having);
  return s;
}

inline std::string render_select(const SelectStmt& stmt) {
  std::string s;
  if (!stmt.ctes.empty()) {
    s += "with ";
    if (stmt.recursive) s += "recursive ";
    for (size_t i = 0; i < stmt.ctes.size(); ++i) {
      if (i) s += ", ";
      const Cte& cte = stmt.ctes[i];
      s += quote_ident(cte.name);
      if (!cte.columns.empty()) {
        s += "(";
        for (size_t j = 0; j < cte.columns.size(); ++j) {
          if (j) s += ", ";
          s += quote_ident(cte.columns[j]);
        }
        s += ")";
      }
      s += " as (" + render_select(*cte.select) + ")";
    }
    s += " ";
  }
  s += render_core(stmt.core);
  for (const auto& [op, core] : stmt.compounds) {
    switch (op) {
      case CompoundOp::Union: s += " union "; break;
      case CompoundOp::UnionAll: s += " union all "; break;
      case CompoundOp::Intersect: s += " intersect "; break;
      case CompoundOp::Except: s += " except "; break;
    }
    s += render_core(core);
  }
  if (!stmt.order_by.empty()) {
    s += " order by ";
    for (size_t i = 0; i < stmt.order_by.size(); ++i) {
      if (i) s += ", ";
      s += render_order_term(stmt.order_by[i]);
    }
  }
  if (stmt.limit) {
    s += " limit " + render_expr(*stmt.limit);
    if (stmt.offset) s += " offset " + render_expr(*stmt.offset);
  }
  return s;
}

}  // namespace finch::sql
