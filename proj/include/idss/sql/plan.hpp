#pragma once

#include <cstddef>
#include <vector>

#include "idss/sql/ast.hpp"

namespace idss::sql {

enum class PlanKind { Simple, Aggregate, Nested };
const char* plan_kind_name(PlanKind k);

// Maps each original avg position to the (sum, count) pair that replaced it
// in the rewritten projection.
struct AvgPair {
  std::size_t original_pos;
  std::size_t sum_pos;
  std::size_t count_pos;
};

struct AvgReconstruction {
  std::vector<AvgPair> mapping;
  bool empty() const { return mapping.empty(); }
};

// One slot per original projection item, pointing into the rewritten projection.
struct OutputSlot {
  bool is_avg = false;
  std::size_t pos = 0;        // valid when !is_avg
  std::size_t sum_pos = 0;    // valid when is_avg
  std::size_t count_pos = 0;  // valid when is_avg
  std::string label;          // user-facing column name
};

struct RewriteResult {
  Select query;
  AvgReconstruction recon;
  std::vector<OutputSlot> slots;
};

// Replaces every avg(c) in the projection by sum(c), count(c), in place
// (later items shift right). Identity when no avg is present; idempotent.
RewriteResult rewrite_avg(const Select& s);

// Validates nesting rules and returns the query kind. Throws TooDeepNesting,
// CorrelatedSubquery, MixedAggregateNesting, HeterogeneousSubqueries or
// UnsupportedFeature on queries outside the subset.
PlanKind classify(const Select& s);

// A broadcastable, subquery-free query.
struct ExecutablePlan {
  Select query;
  bool aggregate = false;
  std::vector<AggFn> signature;  // per projection item, when aggregate
};

ExecutablePlan compile(Select s);  // throws InvalidPlan when subqueries remain

struct SubqueryPlan {
  ExecutablePlan plan;  // avg-rewritten
  AvgReconstruction recon;
  std::vector<OutputSlot> slots;
  bool aggregate = false;
};

struct QueryPlan {
  PlanKind kind = PlanKind::Simple;
  Select original;

  // Broadcast form of the parent. For Nested plans with plain-field
  // subqueries it carries slot-marked holes that must be bound before
  // broadcast; for aggregate-subquery plans it is the widened skeleton
  // (star projection, subquery-dependent conjuncts removed).
  Select parent_template;
  bool parent_has_holes = false;
  bool refilter = false;  // initiator re-filters with the bound predicate

  // Original predicate with subqueries replaced by slot markers; used for
  // the initiator-side re-filter of widened nested results.
  ExprPtr bound_predicate_template;

  std::vector<SubqueryPlan> subplans;
  AvgReconstruction recon;        // parent avg mapping
  std::vector<OutputSlot> slots;  // parent output slots
};

QueryPlan build_plan(const Select& s);

// Splits a classified Nested query into the parent broadcast skeleton and
// its independent subquery plans. Throws InvalidPlan for non-Nested input.
std::pair<Select, std::vector<SubqueryPlan>> decompose_nested(const Select& s);

struct BoundSubquery {
  bool scalar = false;
  Value scalar_value;
  std::vector<Value> in_values;  // deduplicated literal IN-list
};

// Replaces slot markers with bound literals.
Select bind_subqueries(const Select& tmpl, const std::vector<BoundSubquery>& bound);
ExprPtr bind_predicate(const Expr& tmpl, const std::vector<BoundSubquery>& bound);

}  // namespace idss::sql
