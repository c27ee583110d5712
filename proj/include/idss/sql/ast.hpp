#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "idss/value.hpp"

namespace idss::sql {

enum class AggFn { Sum, Count, Min, Max, Avg };
const char* agg_name(AggFn fn);

struct ColumnRef {
  std::string qualifier;  // optional table qualifier, empty when unqualified
  std::string name;

  bool operator==(const ColumnRef&) const = default;
};

struct AggCall {
  AggFn fn = AggFn::Count;
  ColumnRef column;  // ignored when star
  bool star = false; // count(*)

  bool operator==(const AggCall&) const = default;
};

using ProjItem = std::variant<ColumnRef, AggCall>;

struct Literal {
  Value value;

  bool operator==(const Literal&) const = default;
};

struct Select;

// A nested SELECT in a predicate. After decomposition the inner query is
// detached and `slot` indexes the plan's subqueries; binding replaces the
// node with literals.
struct Subquery {
  std::shared_ptr<Select> query;
  int slot = -1;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Comparison {
  ColumnRef column;
  CmpOp op = CmpOp::Eq;
  std::variant<Literal, Subquery> rhs;
};

struct InList {
  ColumnRef column;
  std::vector<Literal> values;
};

struct InSubquery {
  ColumnRef column;
  Subquery sub;
};

struct NotExpr { ExprPtr inner; };
struct AndExpr { ExprPtr lhs, rhs; };
struct OrExpr { ExprPtr lhs, rhs; };

struct Expr {
  std::variant<Comparison, InList, InSubquery, NotExpr, AndExpr, OrExpr> node;
};

struct Select {
  bool star = false;
  std::vector<ProjItem> projection;  // empty when star
  std::string table;
  ExprPtr where;  // null when absent
};

using Ast = Select;

Select clone(const Select& s);
ExprPtr clone_expr(const Expr* e);
bool equal(const Select& a, const Select& b);

// Canonical SQL: uppercase keywords, lowercase aggregate names, single spaces.
std::string render(const Select& s);
std::string render(const Expr& e);
std::string render(const ProjItem& item);

bool contains_subquery(const Expr& e);
bool has_aggregate(const Select& s);

}  // namespace idss::sql
