#include "idss/sql/ast.hpp"

#include <sstream>

namespace idss::sql {

const char* agg_name(AggFn fn) {
  switch (fn) {
    case AggFn::Sum: return "sum";
    case AggFn::Count: return "count";
    case AggFn::Min: return "min";
    case AggFn::Max: return "max";
    case AggFn::Avg: return "avg";
  }
  return "?";
}

namespace {

Subquery clone_sub(const Subquery& s) {
  Subquery out;
  out.slot = s.slot;
  if (s.query) out.query = std::make_shared<Select>(clone(*s.query));
  return out;
}

}  // namespace

ExprPtr clone_expr(const Expr* e) {
  if (!e) return nullptr;
  Expr out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          Comparison c;
          c.column = n.column;
          c.op = n.op;
          if (const auto* lit = std::get_if<Literal>(&n.rhs)) c.rhs = *lit;
          else c.rhs = clone_sub(std::get<Subquery>(n.rhs));
          out.node = std::move(c);
        } else if constexpr (std::is_same_v<T, InList>) {
          out.node = InList{n.column, n.values};
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          out.node = InSubquery{n.column, clone_sub(n.sub)};
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          out.node = NotExpr{clone_expr(n.inner.get())};
        } else if constexpr (std::is_same_v<T, AndExpr>) {
          out.node = AndExpr{clone_expr(n.lhs.get()), clone_expr(n.rhs.get())};
        } else {
          out.node = OrExpr{clone_expr(n.lhs.get()), clone_expr(n.rhs.get())};
        }
      },
      e->node);
  return std::make_unique<Expr>(std::move(out));
}

Select clone(const Select& s) {
  Select out;
  out.star = s.star;
  out.projection = s.projection;
  out.table = s.table;
  out.where = clone_expr(s.where.get());
  return out;
}

namespace {

bool equal_sub(const Subquery& a, const Subquery& b) {
  if (a.slot != b.slot) return false;
  if (static_cast<bool>(a.query) != static_cast<bool>(b.query)) return false;
  return !a.query || equal(*a.query, *b.query);
}

bool equal_expr(const Expr* a, const Expr* b) {
  if (!a || !b) return a == b;
  if (a->node.index() != b->node.index()) return false;
  if (const auto* ca = std::get_if<Comparison>(&a->node)) {
    const auto& cb = std::get<Comparison>(b->node);
    if (!(ca->column == cb.column) || ca->op != cb.op) return false;
    if (ca->rhs.index() != cb.rhs.index()) return false;
    if (const auto* la = std::get_if<Literal>(&ca->rhs)) return *la == std::get<Literal>(cb.rhs);
    return equal_sub(std::get<Subquery>(ca->rhs), std::get<Subquery>(cb.rhs));
  }
  if (const auto* ia = std::get_if<InList>(&a->node)) {
    const auto& ib = std::get<InList>(b->node);
    return ia->column == ib.column && ia->values == ib.values;
  }
  if (const auto* sa = std::get_if<InSubquery>(&a->node)) {
    const auto& sb = std::get<InSubquery>(b->node);
    return sa->column == sb.column && equal_sub(sa->sub, sb.sub);
  }
  if (const auto* na = std::get_if<NotExpr>(&a->node))
    return equal_expr(na->inner.get(), std::get<NotExpr>(b->node).inner.get());
  if (const auto* aa = std::get_if<AndExpr>(&a->node)) {
    const auto& ab = std::get<AndExpr>(b->node);
    return equal_expr(aa->lhs.get(), ab.lhs.get()) && equal_expr(aa->rhs.get(), ab.rhs.get());
  }
  const auto& oa = std::get<OrExpr>(a->node);
  const auto& ob = std::get<OrExpr>(b->node);
  return equal_expr(oa.lhs.get(), ob.lhs.get()) && equal_expr(oa.rhs.get(), ob.rhs.get());
}

}  // namespace

bool equal(const Select& a, const Select& b) {
  return a.star == b.star && a.projection == b.projection && a.table == b.table &&
         equal_expr(a.where.get(), b.where.get());
}

namespace {

std::string render_column(const ColumnRef& c) {
  return c.qualifier.empty() ? c.name : c.qualifier + "." + c.name;
}

std::string render_literal(const Literal& l) {
  if (const auto* s = std::get_if<std::string>(&l.value)) {
    std::string out = "'";
    for (char ch : *s) {
      if (ch == '\'') out += '\'';
      out += ch;
    }
    return out + "'";
  }
  return value_to_string(l.value);
}

// Precedence: OR < AND < NOT < atoms.
int precedence(const Expr& e) {
  if (std::holds_alternative<OrExpr>(e.node)) return 0;
  if (std::holds_alternative<AndExpr>(e.node)) return 1;
  if (std::holds_alternative<NotExpr>(e.node)) return 2;
  return 3;
}

std::string render_expr(const Expr& e, int parent_prec) {
  std::string body = std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          std::string rhs;
          if (const auto* lit = std::get_if<Literal>(&n.rhs)) rhs = render_literal(*lit);
          else {
            const auto& sub = std::get<Subquery>(n.rhs);
            rhs = "(" + (sub.query ? render(*sub.query) : "?" + std::to_string(sub.slot)) + ")";
          }
          return render_column(n.column) + " " + cmp_symbol(n.op) + " " + rhs;
        } else if constexpr (std::is_same_v<T, InList>) {
          std::string out = render_column(n.column) + " IN (";
          for (std::size_t i = 0; i < n.values.size(); ++i) {
            if (i) out += ", ";
            out += render_literal(n.values[i]);
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          return render_column(n.column) + " IN (" +
                 (n.sub.query ? render(*n.sub.query) : "?" + std::to_string(n.sub.slot)) + ")";
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          return "NOT " + render_expr(*n.inner, 2);
        } else if constexpr (std::is_same_v<T, AndExpr>) {
          return render_expr(*n.lhs, 1) + " AND " + render_expr(*n.rhs, 1);
        } else {
          return render_expr(*n.lhs, 0) + " OR " + render_expr(*n.rhs, 0);
        }
      },
      e.node);
  if (precedence(e) < parent_prec) return "(" + body + ")";
  return body;
}

}  // namespace

std::string render(const ProjItem& item) {
  if (const auto* c = std::get_if<ColumnRef>(&item)) return render_column(*c);
  const auto& a = std::get<AggCall>(item);
  return std::string(agg_name(a.fn)) + "(" + (a.star ? "*" : render_column(a.column)) + ")";
}

std::string render(const Expr& e) { return render_expr(e, 0); }

std::string render(const Select& s) {
  std::string out = "SELECT ";
  if (s.star) {
    out += "*";
  } else {
    for (std::size_t i = 0; i < s.projection.size(); ++i) {
      if (i) out += ", ";
      out += render(s.projection[i]);
    }
  }
  out += " FROM " + s.table;
  if (s.where) out += " WHERE " + render(*s.where);
  return out;
}

bool contains_subquery(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) return std::holds_alternative<Subquery>(n.rhs);
        else if constexpr (std::is_same_v<T, InList>) return false;
        else if constexpr (std::is_same_v<T, InSubquery>) return true;
        else if constexpr (std::is_same_v<T, NotExpr>) return contains_subquery(*n.inner);
        else return contains_subquery(*n.lhs) || contains_subquery(*n.rhs);
      },
      e.node);
}

bool has_aggregate(const Select& s) {
  for (const auto& item : s.projection)
    if (std::holds_alternative<AggCall>(item)) return true;
  return false;
}

}  // namespace idss::sql
