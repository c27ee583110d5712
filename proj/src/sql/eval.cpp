#include "idss/sql/eval.hpp"

#include "idss/error.hpp"

namespace idss::sql {

Tri eval_predicate(const Expr& e, const ColumnLookup& lookup) {
  return std::visit(
      [&](const auto& n) -> Tri {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          const auto* lit = std::get_if<Literal>(&n.rhs);
          if (!lit) fail(Errc::InvalidPlan, "unbound scalar subquery in predicate");
          return compare_values(lookup(n.column), n.op, lit->value);
        } else if constexpr (std::is_same_v<T, InList>) {
          if (n.values.empty()) return Tri::False;  // empty set membership
          Value v = lookup(n.column);
          Tri acc = Tri::False;
          for (const auto& lit : n.values)
            acc = tri_or(acc, compare_values(v, CmpOp::Eq, lit.value));
          return acc;
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          fail(Errc::InvalidPlan, "unbound IN subquery in predicate");
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          return tri_not(eval_predicate(*n.inner, lookup));
        } else if constexpr (std::is_same_v<T, AndExpr>) {
          return tri_and(eval_predicate(*n.lhs, lookup), eval_predicate(*n.rhs, lookup));
        } else {
          return tri_or(eval_predicate(*n.lhs, lookup), eval_predicate(*n.rhs, lookup));
        }
      },
      e.node);
}

}  // namespace idss::sql
