#pragma once

#include <functional>

#include "idss/sql/ast.hpp"

namespace idss::sql {

// Resolves a column reference to the current row's value.
using ColumnLookup = std::function<Value(const ColumnRef&)>;

// Three-valued predicate evaluation; rows pass only when the result is True.
// Throws InvalidPlan when an unbound subquery remains in the tree.
Tri eval_predicate(const Expr& e, const ColumnLookup& lookup);

}  // namespace idss::sql
