#include "idss/exec.hpp"

#include "idss/sql/eval.hpp"

namespace idss::storage {

namespace {

int resolve_column(const Table& table, const sql::ColumnRef& ref) {
  if (!ref.qualifier.empty() && ref.qualifier != table.schema.name)
    fail(Errc::UnknownColumn, ref.qualifier + "." + ref.name);
  int idx = table.schema.column_index(ref.name);
  if (idx < 0) fail(Errc::UnknownColumn, table.schema.name + "." + ref.name);
  return idx;
}

Value add_values(const Value& acc, const Value& v) {
  if (is_null(v)) return acc;
  if (is_null(acc)) return v;
  if (std::holds_alternative<std::int64_t>(acc) && std::holds_alternative<std::int64_t>(v))
    return std::get<std::int64_t>(acc) + std::get<std::int64_t>(v);
  auto as_double = [](const Value& x) {
    return std::holds_alternative<double>(x) ? std::get<double>(x)
                                             : static_cast<double>(std::get<std::int64_t>(x));
  };
  return as_double(acc) + as_double(v);
}

Value extremum(const Value& acc, const Value& v, bool want_min) {
  if (is_null(v)) return acc;
  if (is_null(acc)) return v;
  Tri less = compare_values(v, CmpOp::Lt, acc);
  bool take = (less == Tri::True) == want_min;
  return take ? v : acc;
}

}  // namespace

ColumnType aggregate_output_type(sql::AggFn fn, ColumnType input) {
  switch (fn) {
    case sql::AggFn::Count: return ColumnType::Integer;
    case sql::AggFn::Avg: return ColumnType::Real;
    case sql::AggFn::Sum:
      return input == ColumnType::Real ? ColumnType::Real : ColumnType::Integer;
    case sql::AggFn::Min:
    case sql::AggFn::Max:
      return input;
  }
  return input;
}

Recordset execute_local(const Catalog& catalog, const sql::ExecutablePlan& plan) {
  const Table& table = catalog.table(plan.query.table);

  std::vector<const Row*> selected;
  for (const auto& row : table.rows) {
    bool pass = true;
    if (plan.query.where) {
      auto lookup = [&](const sql::ColumnRef& ref) -> Value {
        return row[static_cast<std::size_t>(resolve_column(table, ref))];
      };
      pass = sql::eval_predicate(*plan.query.where, lookup) == Tri::True;
    }
    if (pass) selected.push_back(&row);
  }

  Recordset out;
  if (plan.query.star) {
    for (const auto& col : table.schema.columns) out.columns.push_back({col.name, col.type});
    for (const Row* row : selected) out.rows.push_back(*row);
    return out;
  }

  if (!plan.aggregate) {
    std::vector<int> indices;
    for (const auto& item : plan.query.projection) {
      const auto& ref = std::get<sql::ColumnRef>(item);
      int idx = resolve_column(table, ref);
      indices.push_back(idx);
      out.columns.push_back({ref.name, table.schema.columns[static_cast<std::size_t>(idx)].type});
    }
    for (const Row* row : selected) {
      Row projected;
      for (int idx : indices) projected.push_back((*row)[static_cast<std::size_t>(idx)]);
      out.rows.push_back(std::move(projected));
    }
    return out;
  }

  Row result;
  for (const auto& item : plan.query.projection) {
    const auto& call = std::get<sql::AggCall>(item);
    ColumnType in_type = ColumnType::Integer;
    int idx = -1;
    if (!call.star) {
      idx = resolve_column(table, call.column);
      in_type = table.schema.columns[static_cast<std::size_t>(idx)].type;
    }
    out.columns.push_back({sql::render(item), aggregate_output_type(call.fn, in_type)});

    Value acc;  // null
    std::int64_t count = 0;
    double sum = 0;
    std::int64_t sum_count = 0;
    for (const Row* row : selected) {
      Value v = call.star ? Value{std::int64_t{1}} : (*row)[static_cast<std::size_t>(idx)];
      if (is_null(v)) continue;
      switch (call.fn) {
        case sql::AggFn::Count: ++count; break;
        case sql::AggFn::Sum: acc = add_values(acc, v); break;
        case sql::AggFn::Min: acc = extremum(acc, v, true); break;
        case sql::AggFn::Max: acc = extremum(acc, v, false); break;
        case sql::AggFn::Avg:
          sum += std::holds_alternative<double>(v) ? std::get<double>(v)
                                                   : static_cast<double>(std::get<std::int64_t>(v));
          ++sum_count;
          break;
      }
    }
    switch (call.fn) {
      case sql::AggFn::Count: result.push_back(count); break;
      case sql::AggFn::Avg:
        result.push_back(sum_count ? Value{sum / static_cast<double>(sum_count)} : Value{});
        break;
      default: result.push_back(acc);
    }
  }
  out.rows.push_back(std::move(result));
  return out;
}

}  // namespace idss::storage
