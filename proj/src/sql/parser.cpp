#include "idss/sql/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

#include "idss/error.hpp"

namespace idss::sql {

namespace {

enum class Tok { Ident, Number, String, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;   // identifier (as written), literal text, or symbol
  std::size_t pos = 0;
};

struct Lexer {
  std::string_view src;
  std::size_t at = 0;

  [[noreturn]] void error(std::size_t pos, const std::string& msg) const {
    fail(Errc::SyntaxError, msg + " at position " + std::to_string(pos));
  }

  Token next() {
    while (at < src.size() && std::isspace(static_cast<unsigned char>(src[at]))) ++at;
    Token t;
    t.pos = at;
    if (at >= src.size()) return t;
    char c = src[at];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = at;
      while (at < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[at])) || src[at] == '_'))
        ++at;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(start, at - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && at + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[at + 1])))) {
      std::size_t start = at;
      while (at < src.size() && (std::isdigit(static_cast<unsigned char>(src[at])) ||
                                 src[at] == '.' || src[at] == 'e' || src[at] == 'E' ||
                                 ((src[at] == '+' || src[at] == '-') && at > start &&
                                  (src[at - 1] == 'e' || src[at - 1] == 'E'))))
        ++at;
      t.kind = Tok::Number;
      t.text = std::string(src.substr(start, at - start));
      return t;
    }
    if (c == '\'') {
      ++at;
      std::string out;
      while (true) {
        if (at >= src.size()) error(t.pos, "unterminated string literal");
        if (src[at] == '\'') {
          if (at + 1 < src.size() && src[at + 1] == '\'') { out += '\''; at += 2; continue; }
          ++at;
          break;
        }
        out += src[at++];
      }
      t.kind = Tok::String;
      t.text = std::move(out);
      return t;
    }
    t.kind = Tok::Symbol;
    if (at + 1 < src.size()) {
      std::string_view two = src.substr(at, 2);
      if (two == "<=" || two == ">=" || two == "<>" || two == "!=") {
        t.text = std::string(two);
        at += 2;
        return t;
      }
    }
    t.text = std::string(1, c);
    ++at;
    return t;
  }
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Parser {
  Lexer lex;
  Token cur;

  explicit Parser(std::string_view sql) : lex{sql} { cur = lex.next(); }

  [[noreturn]] void error(const std::string& msg) const {
    fail(Errc::SyntaxError, msg + " at position " + std::to_string(cur.pos));
  }

  bool is_keyword(const char* kw) const {
    return cur.kind == Tok::Ident && lower(cur.text) == kw;
  }
  bool is_symbol(const char* sym) const { return cur.kind == Tok::Symbol && cur.text == sym; }

  void advance() { cur = lex.next(); }

  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) error(std::string("expected ") + kw);
    advance();
  }
  void expect_symbol(const char* sym) {
    if (!is_symbol(sym)) error(std::string("expected '") + sym + "'");
    advance();
  }

  void reject_unsupported(const std::string& kw) const {
    static const char* unsupported[] = {"join",  "group", "order", "limit",  "having",
                                        "distinct", "union", "insert", "update", "delete",
                                        "create", "drop"};
    for (const char* u : unsupported)
      if (kw == u) fail(Errc::UnsupportedFeature, kw + " is outside the supported subset");
  }

  std::string identifier(const char* what) {
    if (cur.kind != Tok::Ident) error(std::string("expected ") + what);
    std::string name = cur.text;
    reject_unsupported(lower(name));
    advance();
    return name;
  }

  std::optional<AggFn> agg_fn(const std::string& name) const {
    std::string n = lower(name);
    if (n == "sum") return AggFn::Sum;
    if (n == "count") return AggFn::Count;
    if (n == "min") return AggFn::Min;
    if (n == "max") return AggFn::Max;
    if (n == "avg") return AggFn::Avg;
    return std::nullopt;
  }

  ColumnRef column_ref(std::string first) {
    ColumnRef c;
    if (is_symbol(".")) {
      advance();
      c.qualifier = std::move(first);
      c.name = identifier("column name");
    } else {
      c.name = std::move(first);
    }
    return c;
  }

  ProjItem projection_item() {
    std::string name = identifier("column or aggregate");
    if (auto fn = agg_fn(name); fn && is_symbol("(")) {
      advance();
      AggCall call;
      call.fn = *fn;
      if (is_symbol("*")) {
        if (*fn != AggFn::Count) error("only count accepts *");
        call.star = true;
        advance();
      } else {
        call.column = column_ref(identifier("column name"));
      }
      expect_symbol(")");
      return call;
    }
    return column_ref(std::move(name));
  }

  Literal literal() {
    if (cur.kind == Tok::Number) {
      std::string text = cur.text;
      advance();
      if (text.find('.') == std::string::npos && text.find('e') == std::string::npos &&
          text.find('E') == std::string::npos) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size()) error("bad integer literal");
        return Literal{v};
      }
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) error("bad real literal");
      return Literal{v};
    }
    if (cur.kind == Tok::String) {
      std::string text = cur.text;
      advance();
      return Literal{std::move(text)};
    }
    if (is_keyword("null")) {
      advance();
      return Literal{Value{}};
    }
    bool neg = false;
    if (is_symbol("-")) {
      neg = true;
      advance();
      if (cur.kind != Tok::Number) error("expected number after '-'");
      Literal l = literal();
      if (auto* i = std::get_if<std::int64_t>(&l.value)) *i = -*i;
      else if (auto* d = std::get_if<double>(&l.value)) *d = -*d;
      return l;
    }
    (void)neg;
    error("expected literal");
  }

  Subquery subquery() {
    Subquery s;
    s.query = std::make_shared<Select>(select_stmt());
    return s;
  }

  ExprPtr atom() {
    if (is_symbol("(")) {
      advance();
      ExprPtr e = or_expr();
      expect_symbol(")");
      return e;
    }
    std::string name = identifier("column name");
    reject_unsupported(lower(name));
    ColumnRef col = column_ref(std::move(name));

    if (is_keyword("in")) {
      advance();
      expect_symbol("(");
      if (is_keyword("select")) {
        Expr e;
        e.node = InSubquery{std::move(col), subquery()};
        expect_symbol(")");
        return std::make_unique<Expr>(std::move(e));
      }
      InList in;
      in.column = std::move(col);
      // An empty list (always false) appears when a subquery binding is empty.
      if (!is_symbol(")")) {
        in.values.push_back(literal());
        while (is_symbol(",")) {
          advance();
          in.values.push_back(literal());
        }
      }
      expect_symbol(")");
      Expr e;
      e.node = std::move(in);
      return std::make_unique<Expr>(std::move(e));
    }

    CmpOp op;
    if (is_symbol("=")) op = CmpOp::Eq;
    else if (is_symbol("<>") || is_symbol("!=")) op = CmpOp::Ne;
    else if (is_symbol("<")) op = CmpOp::Lt;
    else if (is_symbol("<=")) op = CmpOp::Le;
    else if (is_symbol(">")) op = CmpOp::Gt;
    else if (is_symbol(">=")) op = CmpOp::Ge;
    else error("expected comparison operator or IN");
    advance();

    Comparison cmp;
    cmp.column = std::move(col);
    cmp.op = op;
    if (is_symbol("(")) {
      advance();
      if (!is_keyword("select")) error("expected SELECT in subquery");
      cmp.rhs = subquery();
      expect_symbol(")");
    } else {
      cmp.rhs = literal();
    }
    Expr e;
    e.node = std::move(cmp);
    return std::make_unique<Expr>(std::move(e));
  }

  ExprPtr not_expr() {
    if (is_keyword("not")) {
      advance();
      Expr e;
      e.node = NotExpr{not_expr()};
      return std::make_unique<Expr>(std::move(e));
    }
    return atom();
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (is_keyword("and")) {
      advance();
      Expr e;
      e.node = AndExpr{std::move(lhs), not_expr()};
      lhs = std::make_unique<Expr>(std::move(e));
    }
    return lhs;
  }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (is_keyword("or")) {
      advance();
      Expr e;
      e.node = OrExpr{std::move(lhs), and_expr()};
      lhs = std::make_unique<Expr>(std::move(e));
    }
    return lhs;
  }

  Select select_stmt() {
    if (cur.kind == Tok::Ident) reject_unsupported(lower(cur.text));
    expect_keyword("select");
    Select s;
    if (is_symbol("*")) {
      s.star = true;
      advance();
    } else {
      s.projection.push_back(projection_item());
      while (is_symbol(",")) {
        advance();
        s.projection.push_back(projection_item());
      }
    }
    expect_keyword("from");
    s.table = identifier("table name");
    if (is_keyword("where")) {
      advance();
      s.where = or_expr();
    }
    if (cur.kind == Tok::Ident) reject_unsupported(lower(cur.text));
    return s;
  }
};

}  // namespace

Ast parse(std::string_view sql) {
  Parser p(sql);
  Select s = p.select_stmt();
  if (p.is_symbol(";")) p.advance();
  if (p.cur.kind != Tok::End) p.error("unexpected trailing input");
  return s;
}

}  // namespace idss::sql
