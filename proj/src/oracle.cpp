#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "idss/harness.hpp"
#include "idss/sql/parser.hpp"

// Reference evaluator, kept deliberately separate from the distributed path:
// it re-parses the SQL text and evaluates it directly over the union dataset,
// resolving subqueries by recursion instead of phased broadcasts.
namespace idss::harness {

namespace {

using storage::Catalog;
using storage::Recordset;
using storage::Row;
using storage::Table;

int must_resolve(const Table& table, const sql::ColumnRef& ref) {
  if (!ref.qualifier.empty() && ref.qualifier != table.schema.name)
    fail(Errc::UnknownColumn, ref.qualifier + "." + ref.name);
  int idx = table.schema.column_index(ref.name);
  if (idx < 0) fail(Errc::UnknownColumn, table.schema.name + "." + ref.name);
  return idx;
}

bool numeric(const Value& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const Value& v) {
  return std::holds_alternative<double>(v) ? std::get<double>(v)
                                           : static_cast<double>(std::get<std::int64_t>(v));
}

// Independent three-valued comparison (numeric promotion, exact int/int).
Tri cmp(const Value& a, CmpOp op, const Value& b) {
  if (is_null(a) || is_null(b)) return Tri::Unknown;
  int order;
  if (numeric(a) && numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
      order = x < y ? -1 : (x > y ? 1 : 0);
    } else {
      double x = as_double(a), y = as_double(b);
      order = x < y ? -1 : (x > y ? 1 : 0);
    }
  } else if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    order = std::get<std::string>(a).compare(std::get<std::string>(b));
    order = order < 0 ? -1 : (order > 0 ? 1 : 0);
  } else {
    return Tri::Unknown;  // text compared against a number
  }
  bool hit;
  switch (op) {
    case CmpOp::Eq: hit = order == 0; break;
    case CmpOp::Ne: hit = order != 0; break;
    case CmpOp::Lt: hit = order < 0; break;
    case CmpOp::Le: hit = order <= 0; break;
    case CmpOp::Gt: hit = order > 0; break;
    case CmpOp::Ge: hit = order >= 0; break;
    default: hit = false; break;
  }
  return hit ? Tri::True : Tri::False;
}

Recordset evaluate(const sql::Select& s, const Catalog& cat);

// Membership over the known (non-null) values of a single-column result.
// An empty or all-null set is False outright, even for a null probe: the
// subquery binds as a literal IN-list of its known values.
Tri in_set(const Value& v, const Recordset& set) {
  bool any_known = false;
  for (const Row& row : set.rows) {
    if (row.empty() || is_null(row[0])) continue;
    any_known = true;
    if (!is_null(v) && cmp(v, CmpOp::Eq, row[0]) == Tri::True) return Tri::True;
  }
  if (!any_known) return Tri::False;
  return is_null(v) ? Tri::Unknown : Tri::False;
}

Value scalar_of(const Recordset& set) {
  if (set.rows.empty() || set.rows[0].empty()) return {};
  return set.rows[0][0];
}

Tri eval_where(const sql::Expr& e, const Table& table, const Row& row, const Catalog& cat) {
  return std::visit(
      [&](const auto& node) -> Tri {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, sql::Comparison>) {
          Value lhs = row[static_cast<std::size_t>(must_resolve(table, node.column))];
          if (const auto* lit = std::get_if<sql::Literal>(&node.rhs))
            return cmp(lhs, node.op, lit->value);
          const auto& sub = std::get<sql::Subquery>(node.rhs);
          if (!sub.query) fail(Errc::InvalidPlan, "detached subquery");
          return cmp(lhs, node.op, scalar_of(evaluate(*sub.query, cat)));
        } else if constexpr (std::is_same_v<T, sql::InList>) {
          Value lhs = row[static_cast<std::size_t>(must_resolve(table, node.column))];
          if (node.values.empty()) return Tri::False;
          if (is_null(lhs)) return Tri::Unknown;
          for (const auto& lit : node.values)
            if (cmp(lhs, CmpOp::Eq, lit.value) == Tri::True) return Tri::True;
          return Tri::False;
        } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
          Value lhs = row[static_cast<std::size_t>(must_resolve(table, node.column))];
          if (!node.sub.query) fail(Errc::InvalidPlan, "detached subquery");
          return in_set(lhs, evaluate(*node.sub.query, cat));
        } else if constexpr (std::is_same_v<T, sql::NotExpr>) {
          return tri_not(eval_where(*node.inner, table, row, cat));
        } else if constexpr (std::is_same_v<T, sql::AndExpr>) {
          return tri_and(eval_where(*node.lhs, table, row, cat),
                         eval_where(*node.rhs, table, row, cat));
        } else {
          static_assert(std::is_same_v<T, sql::OrExpr>);
          return tri_or(eval_where(*node.lhs, table, row, cat),
                        eval_where(*node.rhs, table, row, cat));
        }
      },
      e.node);
}

ColumnType agg_type(sql::AggFn fn, ColumnType input) {
  if (fn == sql::AggFn::Count) return ColumnType::Integer;
  if (fn == sql::AggFn::Avg) return ColumnType::Real;
  if (fn == sql::AggFn::Sum)
    return input == ColumnType::Real ? ColumnType::Real : ColumnType::Integer;
  return input;  // min / max
}

Value aggregate(const sql::AggCall& call, const Table& table, const std::vector<const Row*>& rows) {
  int idx = call.star ? -1 : must_resolve(table, call.column);
  std::vector<Value> vals;
  for (const Row* row : rows) {
    Value v = call.star ? Value{std::int64_t{1}} : (*row)[static_cast<std::size_t>(idx)];
    if (!is_null(v)) vals.push_back(std::move(v));
  }
  switch (call.fn) {
    case sql::AggFn::Count: return static_cast<std::int64_t>(vals.size());
    case sql::AggFn::Avg: {
      if (vals.empty()) return {};
      double sum = 0;
      for (const auto& v : vals) sum += as_double(v);
      return sum / static_cast<double>(vals.size());
    }
    case sql::AggFn::Sum: {
      if (vals.empty()) return {};
      bool all_int = std::all_of(vals.begin(), vals.end(), [](const Value& v) {
        return std::holds_alternative<std::int64_t>(v);
      });
      if (all_int) {
        std::int64_t sum = 0;
        for (const auto& v : vals) sum += std::get<std::int64_t>(v);
        return sum;
      }
      double sum = 0;
      for (const auto& v : vals) sum += as_double(v);
      return sum;
    }
    case sql::AggFn::Min:
    case sql::AggFn::Max: {
      Value best;
      for (const auto& v : vals) {
        if (is_null(best)) {
          best = v;
          continue;
        }
        Tri less = cmp(v, CmpOp::Lt, best);
        if ((less == Tri::True) == (call.fn == sql::AggFn::Min)) best = v;
      }
      return best;
    }
  }
  return {};
}

Recordset evaluate(const sql::Select& s, const Catalog& cat) {
  const Table& table = cat.table(s.table);

  std::vector<const Row*> selected;
  for (const Row& row : table.rows) {
    if (!s.where || eval_where(*s.where, table, row, cat) == Tri::True) selected.push_back(&row);
  }

  Recordset out;
  if (s.star) {
    for (const auto& col : table.schema.columns) out.columns.push_back({col.name, col.type});
    for (const Row* row : selected) out.rows.push_back(*row);
    return out;
  }

  bool agg = !s.projection.empty() && std::holds_alternative<sql::AggCall>(s.projection[0]);
  if (!agg) {
    std::vector<int> indices;
    for (const auto& item : s.projection) {
      const auto& ref = std::get<sql::ColumnRef>(item);
      int idx = must_resolve(table, ref);
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
  for (const auto& item : s.projection) {
    const auto& call = std::get<sql::AggCall>(item);
    ColumnType in_type = ColumnType::Integer;
    if (!call.star) {
      int idx = must_resolve(table, call.column);
      in_type = table.schema.columns[static_cast<std::size_t>(idx)].type;
    }
    out.columns.push_back({sql::render(item), agg_type(call.fn, in_type)});
    result.push_back(aggregate(call, table, selected));
  }
  out.rows.push_back(std::move(result));
  return out;
}

}  // namespace

storage::Recordset oracle(const std::string& sql, const storage::Catalog& union_catalog) {
  return evaluate(sql::parse(sql), union_catalog);
}

}  // namespace idss::harness
