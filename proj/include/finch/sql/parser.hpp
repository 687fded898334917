#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "finch/sql/ast.hpp"
#include "finch/sql/lexer.hpp"

namespace finch::sql {

struct ParseError : std::runtime_error {
  bool multi_statement = false;
  explicit ParseError(const std::string& msg, bool multi = false)
      : std::runtime_error(msg), multi_statement(multi) {}
};

// Recursive-descent parser for the SQLite SELECT grammar (WITH/CTE, compound
// selects, joins, subqueries, aggregates, window functions). Statements other
// than SELECT/WITH are rejected; callers needing write detection go through
// the execution harness instead.
class Parser {
 public:
  explicit Parser(std::string_view sql) : toks_(lex(sql)) {}

  SelectPtr parse_statement() {
    auto stmt = parse_select();
    bool saw_semi = false;
    while (peek().is_op(";")) {
      advance();
      saw_semi = true;
    }
    if (!at_end()) {
      if (saw_semi) throw ParseError("multi-statement input", true);
      fail();
    }
    return stmt;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == TokKind::End; }

  [[noreturn]] void fail() const {
    if (at_end()) throw ParseError("incomplete input");
    const Token& t = peek();
    std::string spelled = t.kind == TokKind::String ? "'" + t.text + "'" : t.text;
    throw ParseError("near \"" + spelled + "\": syntax error");
  }

  bool accept_kw(std::string_view kw) {
    if (peek().is_kw(kw)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail();
  }
  bool accept_op(std::string_view op) {
    if (peek().is_op(op)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail();
  }

  std::string expect_name() {
    if (peek().kind != TokKind::Ident) fail();
    return advance().text;
  }

  // ---- statement level -------------------------------------------------

  SelectPtr parse_select() {
    auto stmt = std::make_unique<SelectStmt>();
    if (accept_kw("with")) {
      stmt->recursive = accept_kw("recursive");
      do {
        Cte cte;
        cte.name = expect_name();
        if (accept_op("(")) {
          do {
            cte.columns.push_back(expect_name());
          } while (accept_op(","));
          expect_op(")");
        }
        expect_kw("as");
        if (accept_kw("not")) expect_kw("materialized");
        else accept_kw("materialized");
        expect_op("(");
        cte.select = parse_select();
        expect_op(")");
        stmt->ctes.push_back(std::move(cte));
      } while (accept_op(","));
    }
    stmt->core = parse_core();
    for (;;) {
      CompoundOp op;
      if (accept_kw("union")) {
        op = accept_kw("all") ? CompoundOp::UnionAll : CompoundOp::Union;
      } else if (accept_kw("intersect")) {
        op = CompoundOp::Intersect;
      } else if (accept_kw("except")) {
        op = CompoundOp::Except;
      } else {
        break;
      }
      stmt->compounds.emplace_back(op, parse_core());
    }
    if (peek().is_kw("order")) {
      advance();
      expect_kw("by");
      do {
        stmt->order_by.push_back(parse_order_term());
      } while (accept_op(","));
    }
    if (accept_kw("limit")) {
      auto first = parse_expr(1);
      if (accept_kw("offset")) {
        stmt->limit = std::move(first);
        stmt->offset = parse_expr(1);
      } else if (accept_op(",")) {
        // LIMIT <offset>, <count>
        stmt->offset = std::move(first);
        stmt->limit = parse_expr(1);
      } else {
        stmt->limit = std::move(first);
      }
    }
    return stmt;
  }

  OrderTerm parse_order_term() {
    OrderTerm t;
    t.expr = parse_expr(1);
    if (accept_kw("asc")) t.dir = 1;
    else if (accept_kw("desc")) t.dir = 2;
    if (accept_kw("nulls")) {
      if (accept_kw("first")) t.nulls = 1;
      else if (accept_kw("last")) t.nulls = 2;
      else fail();
    }
    return t;
  }

  SelectCore parse_core() {
    SelectCore core;
    expect_kw("select");
    if (accept_kw("distinct")) core.distinct = true;
    else accept_kw("all");
    do {
      core.columns.push_back(parse_result_column());
    } while (accept_op(","));
    if (accept_kw("from")) core.from = parse_from();
    if (accept_kw("where")) core.where = parse_expr(1);
    if (peek().is_kw("group")) {
      advance();
      expect_kw("by");
      do {
        core.group_by.push_back(parse_expr(1));
      } while (accept_op(","));
    }
    if (accept_kw("having")) core.having = parse_expr(1);
    return core;
  }

  ResultColumn parse_result_column() {
    ResultColumn col;
    if (peek().is_op("*")) {
      advance();
      col.star = true;
      return col;
    }
    if (peek().kind == TokKind::Ident && peek(1).is_op(".") && peek(2).is_op("*")) {
      col.star = true;
      col.star_qualifier = advance().text;
      advance();
      advance();
      return col;
    }
    col.expr = parse_expr(1);
    if (accept_kw("as")) {
      col.alias = expect_name();
    } else if (peek().kind == TokKind::Ident && (peek().quoted || !is_stop_word(peek().lower()))) {
      col.alias = advance().text;
    } else if (peek().kind == TokKind::String) {
      col.alias = advance().text;  // SQLite tolerates string aliases
    }
    return col;
  }

  static bool is_stop_word(const std::string& w) {
    static const std::set<std::string> kStop = {
        "where",   "group",  "having", "order",  "limit",  "offset", "on",
        "using",   "join",   "natural", "left",  "right",  "full",   "inner",
        "cross",   "outer",  "union",  "intersect", "except", "as",  "from",
        "and",     "or",     "not",    "when",   "then",   "else",   "end",
        "collate", "asc",    "desc",   "is",     "in",     "like",   "glob",
        "between", "escape", "isnull", "notnull", "regexp", "match", "nulls",
        "by",      "select", "set"};
    return kStop.count(w) > 0;
  }

  std::vector<FromItem> parse_from() {
    std::vector<FromItem> items;
    FromItem first;
    first.ref = parse_table_ref();
    first.join = JoinKind::First;
    items.push_back(std::move(first));
    for (;;) {
      FromItem item;
      if (accept_op(",")) {
        item.join = JoinKind::Comma;
      } else {
        bool natural = accept_kw("natural");
        JoinKind kind = JoinKind::Inner;
        bool has_join = false;
        if (accept_kw("left")) {
          accept_kw("outer");
          kind = JoinKind::Left;
          has_join = true;
        } else if (accept_kw("right")) {
          accept_kw("outer");
          kind = JoinKind::Right;
          has_join = true;
        } else if (accept_kw("full")) {
          accept_kw("outer");
          kind = JoinKind::Full;
          has_join = true;
        } else if (accept_kw("inner")) {
          kind = JoinKind::Inner;
          has_join = true;
        } else if (accept_kw("cross")) {
          kind = JoinKind::Cross;
          has_join = true;
        }
        if (!accept_kw("join")) {
          if (has_join || natural) fail();
          break;
        }
        item.join = kind;
        item.natural = natural;
      }
      item.ref = parse_table_ref();
      if (item.join != JoinKind::Comma) {
        if (accept_kw("on")) {
          item.on = parse_expr(1);
        } else if (accept_kw("using")) {
          expect_op("(");
          do {
            item.using_cols.push_back(expect_name());
          } while (accept_op(","));
          expect_op(")");
        }
      }
      items.push_back(std::move(item));
    }
    return items;
  }

  TableRef parse_table_ref() {
    TableRef ref;
    if (accept_op("(")) {
      if (!(peek().is_kw("select") || peek().is_kw("with"))) fail();
      ref.subquery = parse_select();
      expect_op(")");
    } else {
      ref.table = expect_name();
      if (accept_op(".")) {
        ref.schema = ref.table;
        ref.table = expect_name();
      }
    }
    if (accept_kw("as")) {
      ref.alias = expect_name();
    } else if (peek().kind == TokKind::Ident && (peek().quoted || !is_stop_word(peek().lower()))) {
      ref.alias = advance().text;
    }
    return ref;
  }

  // ---- expressions -------------------------------------------------------

  // Binding powers, higher binds tighter. Mirrors the SQLite operator table.
  static int infix_bp(const Token& t) {
    if (t.kind == TokKind::Op) {
      const std::string& s = t.text;
      if (s == "=" || s == "==" || s == "!=" || s == "<>") return 4;
      if (s == "<" || s == "<=" || s == ">" || s == ">=") return 5;
      if (s == "&" || s == "|" || s == "<<" || s == ">>") return 7;
      if (s == "+" || s == "-") return 8;
      if (s == "*" || s == "/" || s == "%") return 9;
      if (s == "||" || s == "->" || s == "->>") return 10;
      return 0;
    }
    if (t.kind == TokKind::Ident && !t.quoted) {
      std::string w = t.lower();
      if (w == "or") return 1;
      if (w == "and") return 2;
      if (w == "is" || w == "in" || w == "like" || w == "glob" || w == "regexp" ||
          w == "match" || w == "between" || w == "isnull" || w == "notnull" || w == "not")
        return 4;
      if (w == "collate") return 11;
    }
    return 0;
  }

  ExprPtr parse_expr(int min_bp) {
    ExprPtr lhs = parse_prefix();
    for (;;) {
      const Token& t = peek();
      int bp = infix_bp(t);
      if (bp < min_bp || bp == 0) break;
      // `not` is only an infix marker when followed by in/like/between/etc.
      if (t.is_kw("not")) {
        std::string nxt = peek(1).lower();
        if (!(peek(1).kind == TokKind::Ident &&
              (nxt == "in" || nxt == "like" || nxt == "glob" || nxt == "regexp" ||
               nxt == "match" || nxt == "between" || nxt == "null")))
          break;
      }
      lhs = parse_infix(std::move(lhs), t, bp);
    }
    return lhs;
  }

  ExprPtr parse_infix(ExprPtr lhs, const Token& t, int bp) {
    if (t.kind == TokKind::Op) {
      std::string op = advance().text;
      if (op == "==") op = "=";
      if (op == "<>") op = "!=";
      auto node = std::make_unique<Expr>(ExprKind::Binary);
      node->text = op;
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_expr(bp + 1));
      return node;
    }
    std::string w = advance().lower();
    if (w == "or" || w == "and") {
      auto node = std::make_unique<Expr>(ExprKind::Binary);
      node->text = w;
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_expr(bp + 1));
      return node;
    }
    if (w == "collate") {
      auto node = std::make_unique<Expr>(ExprKind::Collate);
      node->text2 = to_lower(expect_name());
      node->args.push_back(std::move(lhs));
      return node;
    }
    if (w == "isnull") return make_is_null(std::move(lhs), false);
    if (w == "notnull") return make_is_null(std::move(lhs), true);
    bool negated = false;
    if (w == "not") {
      negated = true;
      w = advance().lower();
      if (w == "null") return make_is_null(std::move(lhs), true);
    }
    if (w == "is") {
      bool is_not = accept_kw("not");
      if (accept_kw("distinct")) {
        expect_kw("from");
        is_not = !is_not;  // IS DISTINCT FROM == IS NOT
      }
      auto node = std::make_unique<Expr>(ExprKind::Binary);
      node->text = is_not ? "is not" : "is";
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_expr(5));
      return node;
    }
    if (w == "in") return parse_in(std::move(lhs), negated);
    if (w == "between") {
      auto node = std::make_unique<Expr>(ExprKind::Between);
      node->negated = negated;
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_expr(5));
      expect_kw("and");
      node->args.push_back(parse_expr(5));
      return node;
    }
    if (w == "like" || w == "glob" || w == "regexp" || w == "match") {
      auto node = std::make_unique<Expr>(ExprKind::Binary);
      node->text = negated ? "not " + w : w;
      node->args.push_back(std::move(lhs));
      node->args.push_back(parse_expr(5));
      if (accept_kw("escape")) node->args.push_back(parse_expr(5));
      return node;
    }
    fail();
  }

  static ExprPtr make_is_null(ExprPtr lhs, bool negated) {
    auto node = std::make_unique<Expr>(ExprKind::Binary);
    node->text = negated ? "is not" : "is";
    node->args.push_back(std::move(lhs));
    node->args.push_back(std::make_unique<Expr>(ExprKind::NullLit));
    return node;
  }

  ExprPtr parse_in(ExprPtr lhs, bool negated) {
    if (accept_op("(")) {
      if (peek().is_kw("select") || peek().is_kw("with")) {
        auto node = std::make_unique<Expr>(ExprKind::InSelect);
        node->negated = negated;
        node->args.push_back(std::move(lhs));
        node->select = parse_select();
        expect_op(")");
        return node;
      }
      auto node = std::make_unique<Expr>(ExprKind::InList);
      node->negated = negated;
      node->args.push_back(std::move(lhs));
      if (!peek().is_op(")")) {
        do {
          node->args.push_back(parse_expr(1));
        } while (accept_op(","));
      }
      expect_op(")");
      return node;
    }
    auto node = std::make_unique<Expr>(ExprKind::InTable);
    node->negated = negated;
    node->args.push_back(std::move(lhs));
    node->text2 = expect_name();
    return node;
  }

  ExprPtr parse_prefix() {
    const Token& t = peek();
    if (t.is_op("-") || t.is_op("+") || t.is_op("~")) {
      auto node = std::make_unique<Expr>(ExprKind::Unary);
      node->text = advance().text;
      node->args.push_back(parse_expr(12));
      return node;
    }
    if (t.is_kw("not")) {
      advance();
      auto node = std::make_unique<Expr>(ExprKind::Unary);
      node->text = "not";
      node->args.push_back(parse_expr(4));
      return node;
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Number: {
        auto node = std::make_unique<Expr>(ExprKind::NumberLit);
        node->text = advance().text;
        return node;
      }
      case TokKind::String: {
        auto node = std::make_unique<Expr>(ExprKind::StringLit);
        node->text = advance().text;
        return node;
      }
      case TokKind::Blob: {
        auto node = std::make_unique<Expr>(ExprKind::BlobLit);
        node->text = advance().text;
        return node;
      }
      case TokKind::Op: {
        if (t.text == "(") {
          advance();
          if (peek().is_kw("select") || peek().is_kw("with")) {
            auto node = std::make_unique<Expr>(ExprKind::ScalarSubquery);
            node->select = parse_select();
            expect_op(")");
            return node;
          }
          auto inner = parse_expr(1);
          expect_op(")");
          return inner;
        }
        fail();
      }
      case TokKind::Ident:
        return parse_ident_expr();
      default:
        fail();
    }
  }

  ExprPtr parse_ident_expr() {
    const Token& t = peek();
    std::string low = t.lower();
    if (!t.quoted) {
      if (low == "null") {
        advance();
        return std::make_unique<Expr>(ExprKind::NullLit);
      }
      if (low == "true" || low == "false") {
        advance();
        auto node = std::make_unique<Expr>(ExprKind::NumberLit);
        node->text = (low == "true") ? "1" : "0";
        return node;
      }
      if (low == "cast") {
        advance();
        expect_op("(");
        auto node = std::make_unique<Expr>(ExprKind::Cast);
        node->args.push_back(parse_expr(1));
        expect_kw("as");
        node->text2 = parse_type_name();
        expect_op(")");
        return node;
      }
      if (low == "case") return parse_case();
      if (low == "exists") {
        advance();
        expect_op("(");
        auto node = std::make_unique<Expr>(ExprKind::Exists);
        node->select = parse_select();
        expect_op(")");
        return node;
      }
      if (low == "current_date" || low == "current_time" || low == "current_timestamp") {
        advance();
        auto node = std::make_unique<Expr>(ExprKind::Column);
        node->text = low;
        return node;
      }
      if (is_stop_word(low) && low != "left" && low != "right" && low != "match") fail();
    }
    std::string first = advance().text;
    if (peek().is_op("(")) return parse_call(to_lower(first));
    auto node = std::make_unique<Expr>(ExprKind::Column);
    if (accept_op(".")) {
      if (peek().is_op("*")) fail();  // t.* is only valid as a result column
      std::string second = expect_name();
      if (accept_op(".")) {
        // schema.table.column: drop the schema qualifier
        node->text2 = second;
        node->text = expect_name();
      } else {
        node->text2 = first;
        node->text = second;
      }
    } else {
      node->text = first;
    }
    return node;
  }

  std::string parse_type_name() {
    std::string name = to_lower(expect_name());
    while (peek().kind == TokKind::Ident && !peek().is_op(")")) {
      if (peek().is_op("(")) break;
      name += " " + to_lower(advance().text);
    }
    if (accept_op("(")) {
      name += "(";
      name += advance().text;
      if (accept_op(",")) {
        name += ", " + advance().text;
      }
      expect_op(")");
      name += ")";
    }
    return name;
  }

  ExprPtr parse_case() {
    advance();  // case
    auto node = std::make_unique<Expr>(ExprKind::CaseExpr);
    if (!peek().is_kw("when")) {
      node->case_has_operand = true;
      node->args.push_back(parse_expr(1));
    }
    while (accept_kw("when")) {
      node->args.push_back(parse_expr(1));
      expect_kw("then");
      node->args.push_back(parse_expr(1));
    }
    if (node->args.size() < (node->case_has_operand ? 3u : 2u)) fail();
    if (accept_kw("else")) {
      node->case_has_else = true;
      node->args.push_back(parse_expr(1));
    }
    expect_kw("end");
    return node;
  }

  ExprPtr parse_call(const std::string& name) {
    expect_op("(");
    auto node = std::make_unique<Expr>(ExprKind::FuncCall);
    node->text = name;
    if (peek().is_op("*")) {
      advance();
      node->star_arg = true;
    } else if (!peek().is_op(")")) {
      if (accept_kw("distinct")) node->distinct = true;
      do {
        node->args.push_back(parse_expr(1));
      } while (accept_op(","));
    }
    expect_op(")");
    if (peek().is_kw("over")) {
      advance();
      expect_op("(");
      node->window = std::make_unique<WindowSpec>();
      if (peek().is_kw("partition")) {
        advance();
        expect_kw("by");
        do {
          node->window->partition_by.push_back(parse_expr(1));
        } while (accept_op(","));
      }
      if (peek().is_kw("order")) {
        advance();
        expect_kw("by");
        do {
          node->window->order_by.push_back(parse_order_term());
        } while (accept_op(","));
      }
      // frame clause: keep as canonical lowered token text
      std::string frame;
      int depth = 0;
      while (!(depth == 0 && peek().is_op(")"))) {
        if (at_end()) fail();
        const Token& ft = peek();
        if (ft.is_op("(")) ++depth;
        if (ft.is_op(")")) --depth;
        std::string piece = ft.kind == TokKind::String ? "'" + ft.text + "'" : ft.lower();
        if (!frame.empty() && !ft.is_op(")") && !ft.is_op(",")) frame += " ";
        frame += piece;
        advance();
      }
      node->window->frame = frame;
      expect_op(")");
    }
    return node;
  }
};

inline SelectPtr parse_sql(std::string_view sql) { return Parser(sql).parse_statement(); }

}  // namespace finch::sql
