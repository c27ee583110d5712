#include "idss/sql/plan.hpp"

#include <functional>

#include "idss/error.hpp"

namespace idss::sql {

const char* plan_kind_name(PlanKind k) {
  switch (k) {
    case PlanKind::Simple: return "Simple";
    case PlanKind::Aggregate: return "Aggregate";
    case PlanKind::Nested: return "Nested";
  }
  return "?";
}

namespace {

void walk_subqueries(Expr& e, const std::function<void(Subquery&, bool scalar_position)>& fn) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          if (auto* sub = std::get_if<Subquery>(&n.rhs)) fn(*sub, true);
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          fn(n.sub, false);
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          walk_subqueries(*n.inner, fn);
        } else if constexpr (std::is_same_v<T, AndExpr> || std::is_same_v<T, OrExpr>) {
          walk_subqueries(*n.lhs, fn);
          walk_subqueries(*n.rhs, fn);
        }
      },
      e.node);
}

void walk_subqueries(const Expr& e, const std::function<void(const Subquery&, bool)>& fn) {
  walk_subqueries(const_cast<Expr&>(e),
                  [&](Subquery& s, bool scalar) { fn(s, scalar); });
}

void walk_columns(const Expr& e, const std::function<void(const ColumnRef&)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison> || std::is_same_v<T, InList> ||
                      std::is_same_v<T, InSubquery>) {
          fn(n.column);
        }
        if constexpr (std::is_same_v<T, NotExpr>) walk_columns(*n.inner, fn);
        if constexpr (std::is_same_v<T, AndExpr> || std::is_same_v<T, OrExpr>) {
          walk_columns(*n.lhs, fn);
          walk_columns(*n.rhs, fn);
        }
      },
      e.node);
}

void check_projection_shape(const Select& s) {
  if (s.star) return;
  bool agg = false, plain = false;
  for (const auto& item : s.projection) {
    if (std::holds_alternative<AggCall>(item)) agg = true;
    else plain = true;
  }
  if (agg && plain)
    fail(Errc::UnsupportedFeature, "mixing aggregate and plain columns needs GROUP BY");
}

void check_no_foreign_qualifiers(const Select& s) {
  auto check = [&](const ColumnRef& c) {
    if (!c.qualifier.empty() && c.qualifier != s.table)
      fail(Errc::CorrelatedSubquery,
           "column " + c.qualifier + "." + c.name + " does not belong to " + s.table);
  };
  for (const auto& item : s.projection)
    if (const auto* c = std::get_if<ColumnRef>(&item)) check(*c);
  if (s.where) walk_columns(*s.where, check);
}

}  // namespace

PlanKind classify(const Select& s) {
  check_projection_shape(s);

  std::vector<const Select*> subs;
  std::vector<bool> scalar_pos;
  if (s.where)
    walk_subqueries(*s.where, [&](const Subquery& sub, bool scalar) {
      if (!sub.query) fail(Errc::InvalidPlan, "detached subquery in classification");
      subs.push_back(sub.query.get());
      scalar_pos.push_back(scalar);
    });

  if (subs.empty()) return has_aggregate(s) ? PlanKind::Aggregate : PlanKind::Simple;

  for (const Select* sub : subs) {
    if (sub->where) {
      bool deeper = false;
      walk_subqueries(*sub->where, [&](const Subquery&, bool) { deeper = true; });
      if (deeper) fail(Errc::TooDeepNesting, "subqueries may not contain subqueries");
    }
    check_projection_shape(*sub);
    if (sub->star || sub->projection.size() != 1)
      fail(Errc::UnsupportedFeature, "a subquery must project exactly one column or aggregate");
    check_no_foreign_qualifiers(*sub);
  }

  bool first_agg = has_aggregate(*subs.front());
  for (const Select* sub : subs)
    if (has_aggregate(*sub) != first_agg)
      fail(Errc::HeterogeneousSubqueries, "subqueries must be all plain-field or all aggregate");

  if (first_agg && has_aggregate(s))
    fail(Errc::MixedAggregateNesting, "parent and subqueries may not both aggregate");

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (scalar_pos[i] && !has_aggregate(*subs[i]))
      fail(Errc::UnsupportedFeature, "a scalar comparison subquery must be an aggregate");
    if (!scalar_pos[i] && has_aggregate(*subs[i]))
      fail(Errc::UnsupportedFeature, "an IN subquery must project a plain field");
  }

  return PlanKind::Nested;
}

RewriteResult rewrite_avg(const Select& s) {
  RewriteResult out;
  out.query = clone(s);
  if (s.star) return out;

  std::vector<ProjItem> rewritten;
  for (std::size_t i = 0; i < s.projection.size(); ++i) {
    const auto& item = s.projection[i];
    OutputSlot slot;
    slot.label = render(item);
    const auto* call = std::get_if<AggCall>(&item);
    if (call && call->fn == AggFn::Avg) {
      slot.is_avg = true;
      slot.sum_pos = rewritten.size();
      slot.count_pos = rewritten.size() + 1;
      rewritten.push_back(AggCall{AggFn::Sum, call->column, false});
      rewritten.push_back(AggCall{AggFn::Count, call->column, false});
      out.recon.mapping.push_back(AvgPair{i, slot.sum_pos, slot.count_pos});
    } else {
      slot.pos = rewritten.size();
      rewritten.push_back(item);
    }
    out.slots.push_back(std::move(slot));
  }
  out.query.projection = std::move(rewritten);
  return out;
}

ExecutablePlan compile(Select s) {
  if (s.where && contains_subquery(*s.where))
    fail(Errc::InvalidPlan, "executable plans must be subquery-free");
  ExecutablePlan plan;
  plan.aggregate = has_aggregate(s);
  if (plan.aggregate) {
    check_projection_shape(s);
    for (const auto& item : s.projection) {
      const auto& call = std::get<AggCall>(item);
      if (call.fn == AggFn::Avg)
        fail(Errc::InvalidPlan, "avg must be rewritten before compilation");
      plan.signature.push_back(call.fn);
    }
  }
  plan.query = std::move(s);
  return plan;
}

namespace {

SubqueryPlan make_subquery_plan(const Select& sub) {
  SubqueryPlan out;
  out.aggregate = has_aggregate(sub);
  RewriteResult r = rewrite_avg(sub);
  out.recon = std::move(r.recon);
  out.slots = std::move(r.slots);
  out.plan = compile(std::move(r.query));
  return out;
}

// Drops top-level AND conjuncts containing a subquery marker.
ExprPtr prune_subquery_conjuncts(const Expr& e) {
  if (const auto* a = std::get_if<AndExpr>(&e.node)) {
    ExprPtr lhs = prune_subquery_conjuncts(*a->lhs);
    ExprPtr rhs = prune_subquery_conjuncts(*a->rhs);
    if (!lhs) return rhs;
    if (!rhs) return lhs;
    Expr out;
    out.node = AndExpr{std::move(lhs), std::move(rhs)};
    return std::make_unique<Expr>(std::move(out));
  }
  if (contains_subquery(e)) return nullptr;
  return clone_expr(&e);
}

}  // namespace

std::pair<Select, std::vector<SubqueryPlan>> decompose_nested(const Select& s) {
  if (classify(s) != PlanKind::Nested)
    fail(Errc::InvalidPlan, "decompose_nested requires a Nested plan");

  RewriteResult parent = rewrite_avg(s);
  std::vector<SubqueryPlan> subplans;
  walk_subqueries(*parent.query.where, [&](Subquery& sub, bool) {
    subplans.push_back(make_subquery_plan(*sub.query));
    sub.slot = static_cast<int>(subplans.size() - 1);
    sub.query = nullptr;
  });
  return {std::move(parent.query), std::move(subplans)};
}

QueryPlan build_plan(const Select& s) {
  QueryPlan plan;
  plan.kind = classify(s);
  plan.original = clone(s);

  if (plan.kind != PlanKind::Nested) {
    RewriteResult r = rewrite_avg(s);
    plan.parent_template = std::move(r.query);
    plan.recon = std::move(r.recon);
    plan.slots = std::move(r.slots);
    return plan;
  }

  auto [marked_parent, subplans] = decompose_nested(s);
  plan.subplans = std::move(subplans);
  plan.bound_predicate_template = clone_expr(marked_parent.where.get());

  RewriteResult r = rewrite_avg(s);
  plan.recon = std::move(r.recon);
  plan.slots = std::move(r.slots);

  bool subs_aggregate = plan.subplans.front().aggregate;
  if (subs_aggregate) {
    // Broadcast a widened skeleton; the initiator re-filters after binding.
    plan.refilter = true;
    plan.parent_template.star = true;
    plan.parent_template.table = s.table;
    plan.parent_template.where = prune_subquery_conjuncts(*marked_parent.where);
  } else {
    plan.parent_has_holes = true;
    plan.parent_template = std::move(marked_parent);
  }
  return plan;
}

namespace {

ExprPtr bind_expr(const Expr& e, const std::vector<BoundSubquery>& bound) {
  Expr out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          Comparison c;
          c.column = n.column;
          c.op = n.op;
          if (const auto* lit = std::get_if<Literal>(&n.rhs)) {
            c.rhs = *lit;
          } else {
            const auto& sub = std::get<Subquery>(n.rhs);
            if (sub.slot < 0 || static_cast<std::size_t>(sub.slot) >= bound.size())
              fail(Errc::InvalidPlan, "unbound subquery slot");
            c.rhs = Literal{bound[sub.slot].scalar_value};
          }
          out.node = std::move(c);
        } else if constexpr (std::is_same_v<T, InList>) {
          out.node = InList{n.column, n.values};
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          if (n.sub.slot < 0 || static_cast<std::size_t>(n.sub.slot) >= bound.size())
            fail(Errc::InvalidPlan, "unbound subquery slot");
          InList in;
          in.column = n.column;
          for (const auto& v : bound[n.sub.slot].in_values) in.values.push_back(Literal{v});
          out.node = std::move(in);
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          out.node = NotExpr{bind_expr(*n.inner, bound)};
        } else if constexpr (std::is_same_v<T, AndExpr>) {
          out.node = AndExpr{bind_expr(*n.lhs, bound), bind_expr(*n.rhs, bound)};
        } else {
          out.node = OrExpr{bind_expr(*n.lhs, bound), bind_expr(*n.rhs, bound)};
        }
      },
      e.node);
  return std::make_unique<Expr>(std::move(out));
}

}  // namespace

ExprPtr bind_predicate(const Expr& tmpl, const std::vector<BoundSubquery>& bound) {
  return bind_expr(tmpl, bound);
}

Select bind_subqueries(const Select& tmpl, const std::vector<BoundSubquery>& bound) {
  Select out = clone(tmpl);
  if (out.where) out.where = bind_expr(*tmpl.where, bound);
  return out;
}

}  // namespace idss::sql
