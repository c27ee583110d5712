#pragma once

#include "idss/sql/plan.hpp"
#include "idss/storage.hpp"

namespace idss::storage {

// Evaluates an executable plan over this peer's local data only. Aggregate
// plans yield exactly one row (count 0 / null partials on empty input).
Recordset execute_local(const Catalog& catalog, const sql::ExecutablePlan& plan);

// Result column type for an aggregate over a column of type `input`.
ColumnType aggregate_output_type(sql::AggFn fn, ColumnType input);

}  // namespace idss::storage
