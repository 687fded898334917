#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "finch/sql/parser.hpp"
#include "finch/sql/writer.hpp"
#include "finch/util.hpp"

namespace finch {

enum class ComponentKind {
  SELECT,
  FROM,
  WHERE,
  GROUP_BY,
  HAVING,
  ORDER_BY,
  JOIN,
  AGG,
  LIMIT,
  SUBQUERY
};

inline constexpr std::array<ComponentKind, 10> kAllComponents = {
    ComponentKind::SELECT, ComponentKind::FROM,     ComponentKind::WHERE,
    ComponentKind::GROUP_BY, ComponentKind::HAVING, ComponentKind::ORDER_BY,
    ComponentKind::JOIN,   ComponentKind::AGG,      ComponentKind::LIMIT,
    ComponentKind::SUBQUERY};

inline const char* component_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::SELECT: return "SELECT";
    case ComponentKind::FROM: return "FROM";
    case ComponentKind::WHERE: return "WHERE";
    case ComponentKind::GROUP_BY: return "GROUP_BY";
    case ComponentKind::HAVING: return "HAVING";
    case ComponentKind::ORDER_BY: return "ORDER_BY";
    case ComponentKind::JOIN: return "JOIN";
    case ComponentKind::AGG: return "AGG";
    case ComponentKind::LIMIT: return "LIMIT";
    case ComponentKind::SUBQUERY: return "SUBQUERY";
  }
  return "?";
}

inline std::optional<ComponentKind> component_from_name(std::string_view name) {
  for (ComponentKind k : kAllComponents)
    if (name == component_name(k)) return k;
  return std::nullopt;
}

// One parsed query, reduced to comparable per-clause item lists. Items are
// canonical text: lowercased identifiers, aliases resolved to base tables,
// literals normalized by value, redundant parentheses gone. ORDER_BY keeps
// source order; every other component is a multiset.
struct Decomposition {
  std::map<ComponentKind, std::vector<std::string>> components;
  int nesting_depth = 0;
  std::string canonical;  // full canonical rendering of the normalized query

  bool has(ComponentKind k) const {
    auto it = components.find(k);
    return it != components.end() && !it->second.empty();
  }
  const std::vector<std::string>& items(ComponentKind k) const {
    static const std::vector<std::string> kEmpty;
    auto it = components.find(k);
    return it == components.end() ? kEmpty : it->second;
  }
};

struct DecomposeResult {
  bool ok = false;
  Decomposition decomp;
  std::string error;
  bool multi_statement = false;
};

namespace detail {

using namespace finch::sql;

struct Scope {
  const Scope* parent = nullptr;
  std::map<std::string, std::string> alias_to_base;
  std::vector<std::string> tables;  // display names in FROM order

  std::string resolve(const std::string& qual) const {
    for (const Scope* s = this; s; s = s->parent) {
      auto it = s->alias_to_base.find(qual);
      if (it != s->alias_to_base.end()) return it->second;
    }
    return qual;
  }
};

// Rewrites the tree in place: lowercases identifiers, resolves table aliases
// against the scope chain, renames derived tables to positional subqN names,
// substitutes column aliases and ordinals in GROUP BY/HAVING/ORDER BY, folds
// signed numeric literals, and drops the no-op unary plus.
class Normalizer {
 public:
  void run(SelectStmt& stmt) { normalize_stmt(stmt, nullptr); }

 private:
  struct CoreCtx {
    Scope scope;
    std::map<std::string, const Expr*> aliases;  // select alias -> expr
    const SelectCore* core = nullptr;
  };

  void normalize_stmt(SelectStmt& stmt, const Scope* parent) {
    Scope outer;
    outer.parent = parent;
    for (auto& cte : stmt.ctes) {
      cte.name = to_lower(cte.name);
      for (auto& c : cte.columns) c = to_lower(c);
      normalize_stmt(*cte.select, &outer);
    }
    CoreCtx main_ctx;
    normalize_core(stmt.core, &outer, main_ctx);
    for (auto& [op, core] : stmt.compounds) {
      CoreCtx ctx;
      normalize_core(core, &outer, ctx);
    }
    for (auto& term : stmt.order_by) {
      substitute_term(term.expr, main_ctx, true);
      normalize_expr(term.expr, main_ctx.scope);
    }
    if (stmt.limit) normalize_expr(stmt.limit, main_ctx.scope);
    if (stmt.offset) normalize_expr(stmt.offset, main_ctx.scope);
  }

  void normalize_core(SelectCore& core, const Scope* parent, CoreCtx& ctx) {
    ctx.scope.parent = parent;
    ctx.core = &core;
    int subq_counter = 0;
    for (auto& item : core.from) {
      TableRef& ref = item.ref;
      std::string display;
      if (ref.subquery) {
        normalize_stmt(*ref.subquery, parent);
        display = "subq" + std::to_string(++subq_counter);
        if (!ref.alias.empty()) ctx.scope.alias_to_base[to_lower(ref.alias)] = display;
        ref.alias = display;
      } else {
        ref.schema.clear();
        ref.table = to_lower(ref.table);
        display = ref.table;
        if (!ref.alias.empty()) {
          ctx.scope.alias_to_base[to_lower(ref.alias)] = display;
          ref.alias.clear();
        }
      }
      for (auto& c : item.using_cols) c = to_lower(c);
      ctx.scope.tables.push_back(display);
    }
    // ON conditions may reference any table in the clause, so resolve them
    // only after every FROM entry is registered.
    for (auto& item : core.from) {
      if (item.on) normalize_expr(item.on, ctx.scope);
    }
    for (auto& col : core.columns) {
      if (col.star) {
        if (!col.star_qualifier.empty())
          col.star_qualifier = ctx.scope.resolve(to_lower(col.star_qualifier));
        continue;
      }
      normalize_expr(col.expr, ctx.scope);
      if (!col.alias.empty()) {
        ctx.aliases[to_lower(col.alias)] = col.expr.get();
        col.alias.clear();
      }
    }
    if (core.where) normalize_expr(core.where, ctx.scope);
    for (auto& g : core.group_by) {
      substitute_term(g, ctx, true);
      normalize_expr(g, ctx.scope);
    }
    if (core.having) {
      substitute_aliases(core.having, ctx);
      normalize_expr(core.having, ctx.scope);
    }
  }

  // Whole-term ordinal (ORDER BY 2) plus recursive alias references.
  void substitute_term(ExprPtr& e, const CoreCtx& ctx, bool allow_ordinal) {
    if (allow_ordinal && e->kind == ExprKind::NumberLit) {
      int64_t k = 0;
      auto [p, ec] = std::from_chars(e->text.data(), e->text.data() + e->text.size(), k);
      if (ec == std::errc() && p == e->text.data() + e->text.size() && k >= 1 &&
          static_cast<size_t>(k) <= ctx.core->columns.size()) {
        const ResultColumn& col = ctx.core->columns[static_cast<size_t>(k) - 1];
        if (!col.star && col.expr) {
          e = col.expr->clone();
          return;
        }
      }
    }
    substitute_aliases(e, ctx);
  }

  void substitute_aliases(ExprPtr& e, const CoreCtx& ctx) {
    if (e->kind == ExprKind::Column && e->text2.empty()) {
      auto it = ctx.aliases.find(to_lower(e->text));
      if (it != ctx.aliases.end()) {
        e = it->second->clone();
        return;
      }
    }
    for (auto& arg : e->args) substitute_aliases(arg, ctx);
    // alias visibility does not extend into nested selects
  }

  void normalize_expr(ExprPtr& e, const Scope& scope) {
    switch (e->kind) {
      case ExprKind::Column:
        e->text = to_lower(e->text);
        if (!e->text2.empty()) e->text2 = scope.resolve(to_lower(e->text2));
        return;
      case ExprKind::InTable:
        e->text2 = scope.resolve(to_lower(e->text2));
        break;
      case ExprKind::InSelect:
      case ExprKind::ScalarSubquery:
      case ExprKind::Exists:
        for (auto& arg : e->args) normalize_expr(arg, scope);
        normalize_stmt(*e->select, &scope);
        return;
      default:
        break;
    }
    for (auto& arg : e->args) normalize_expr(arg, scope);
    if (e->window) {
      for (auto& p : e->window->partition_by) normalize_expr(p, scope);
      for (auto& t : e->window->order_by) normalize_expr(t.expr, scope);
    }
    if (e->kind == ExprKind::Unary && e->args.size() == 1 &&
        e->args[0]->kind == ExprKind::NumberLit) {
      if (e->text == "-") {
        std::string t = e->args[0]->text;
        auto lit = std::make_unique<Expr>(ExprKind::NumberLit);
        lit->text = (!t.empty() && t[0] == '-') ? t.substr(1) : "-" + t;
        e = std::move(lit);
      } else if (e->text == "+") {
        e = std::move(e->args[0]);
      }
    } else if (e->kind == ExprKind::Unary && e->text == "+") {
      e = std::move(e->args[0]);
    }
  }
};

inline const std::set<std::string>& aggregate_names() {
  static const std::set<std::string> kAggs = {"count", "sum",   "avg",
                                              "min",   "max",   "total",
                                              "group_concat"};
  return kAggs;
}

class Extractor {
 public:
  Decomposition run(const SelectStmt& stmt) {
    collect_nested(stmt, 0);
    collect_clauses(stmt);
    out_.nesting_depth = max_depth_;
    for (auto it = out_.components.begin(); it != out_.components.end();) {
      it = it->second.empty() ? out_.components.erase(it) : std::next(it);
    }
    return std::move(out_);
  }

 private:
  Decomposition out_;
  int max_depth_ = 0;

  std::vector<std::string>& comp(ComponentKind k) { return out_.components[k]; }

  static std::string display_name(const TableRef& ref) {
    return ref.subquery ? ref.alias : ref.table;
  }

  void add_subquery(const SelectStmt& s, int depth) {
    comp(ComponentKind::SUBQUERY).push_back(std::to_string(depth) + ":" + render_select(s));
    max_depth_ = std::max(max_depth_, depth);
    collect_nested(s, depth);
  }

  void walk_expr(const Expr& e, int depth) {
    if (e.select) add_subquery(*e.select, depth + 1);
    for (const auto& arg : e.args) walk_expr(*arg, depth);
    if (e.window) {
      for (const auto& p : e.window->partition_by) walk_expr(*p, depth);
      for (const auto& t : e.window->order_by) walk_expr(*t.expr, depth);
    }
  }

  void walk_core(const SelectCore& core, int depth) {
    for (const auto& item : core.from) {
      if (item.ref.subquery) add_subquery(*item.ref.subquery, depth + 1);
      if (item.on) walk_expr(*item.on, depth);
    }
    for (const auto& col : core.columns)
      if (col.expr) walk_expr(*col.expr, depth);
    if (core.where) walk_expr(*core.where, depth);
    for (const auto& g : core.group_by) walk_expr(*g, depth);
    if (core.having) walk_expr(*core.having, depth);
  }

  void collect_nested(const SelectStmt& stmt, int depth) {
    for (const auto& cte : stmt.ctes) add_subquery(*cte.select, depth + 1);
    walk_core(stmt.core, depth);
    for (const auto& [op, core] : stmt.compounds) walk_core(core, depth);
    for (const auto& t : stmt.order_by) walk_expr(*t.expr, depth);
    if (stmt.limit) walk_expr(*stmt.limit, depth);
    if (stmt.offset) walk_expr(*stmt.offset, depth);
  }

  static void split_and(const Expr& e, std::vector<const Expr*>& out) {
    if (e.kind == ExprKind::Binary && e.text == "and") {
      split_and(*e.args[0], out);
      split_and(*e.args[1], out);
      return;
    }
    out.push_back(&e);
  }

  void collect_aggs(const Expr& e) {
    if (e.kind == ExprKind::FuncCall && !e.window && aggregate_names().count(e.text)) {
      comp(ComponentKind::AGG).push_back(render_expr(e));
      return;  // aggregate arguments cannot legally nest further aggregates
    }
    if (e.select) return;  // nested selects count via SUBQUERY, not here
    for (const auto& arg : e.args) collect_aggs(*arg);
  }

  void clause_items_for_core(const SelectCore& core) {
    for (const auto& col : core.columns) {
      if (col.star) {
        comp(ComponentKind::SELECT)
            .push_back(col.star_qualifier.empty() ? "*" : col.star_qualifier + ".*");
      } else {
        comp(ComponentKind::SELECT).push_back(render_expr(*col.expr));
        collect_aggs(*col.expr);
      }
    }
    for (size_t i = 0; i < core.from.size(); ++i) {
      const FromItem& item = core.from[i];
      comp(ComponentKind::FROM).push_back(display_name(item.ref));
      if (i == 0 || item.join == JoinKind::Comma) continue;
      std::string cond;
      if (item.on) {
        cond = render_expr(*item.on);
      } else if (!item.using_cols.empty()) {
        cond = "using (";
        for (size_t j = 0; j < item.using_cols.size(); ++j) {
          if (j) cond += ", ";
          cond += item.using_cols[j];
        }
        cond += ")";
      } else if (item.natural) {
        cond = "natural";
      }
      comp(ComponentKind::JOIN)
          .push_back(display_name(core.from[i - 1].ref) + "|" + display_name(item.ref) + "|" +
                     cond);
    }
    if (core.where) {
      std::vector<const Expr*> conjuncts;
      split_and(*core.where, conjuncts);
      for (const Expr* c : conjuncts) comp(ComponentKind::WHERE).push_back(render_expr(*c));
    }
    for (const auto& g : core.group_by) comp(ComponentKind::GROUP_BY).push_back(render_expr(*g));
    if (core.having) {
      std::vector<const Expr*> conjuncts;
      split_and(*core.having, conjuncts);
      for (const Expr* c : conjuncts) {
        comp(ComponentKind::HAVING).push_back(render_expr(*c));
        collect_aggs(*c);
      }
    }
  }

  void collect_clauses(const SelectStmt& stmt) {
    clause_items_for_core(stmt.core);
    for (const auto& [op, core] : stmt.compounds) clause_items_for_core(core);
    for (const auto& t : stmt.order_by) {
      comp(ComponentKind::ORDER_BY).push_back(render_order_term(t));
      collect_aggs(*t.expr);
    }
    if (stmt.limit) comp(ComponentKind::LIMIT).push_back(render_expr(*stmt.limit));
    if (stmt.offset)
      comp(ComponentKind::LIMIT).push_back("offset " + render_expr(*stmt.offset));
  }
};

}  // namespace detail

inline DecomposeResult decompose(std::string_view sql) {
  DecomposeResult r;
  if (trim_view(sql).empty()) {
    r.error = "empty input";
    return r;
  }
  try {
    auto stmt = sql::parse_sql(sql);
    detail::Normalizer norm;
    norm.run(*stmt);
    detail::Extractor ex;
    r.decomp = ex.run(*stmt);
    r.decomp.canonical = sql::render_select(*stmt);
    r.ok = true;
  } catch (const sql::ParseError& e) {
    r.error = e.what();
    r.multi_statement = e.multi_statement;
  } catch (const sql::LexError& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace finch
