#include "idss/merge.hpp"

namespace idss::merge {

std::int64_t ttl_decay(std::int64_t old_ttl_ms, DecayFactor x) {
  if (old_ttl_ms < 0) fail(Errc::InvalidTtl, "negative ttl");
  return old_ttl_ms * x.num / x.den;  // integer floor for non-negative input
}

storage::Recordset merge_recordsets(const storage::Recordset& a, const storage::Recordset& b) {
  if (a.columns != b.columns)
    fail(Errc::SchemaMismatch, "recordset column lists differ");
  storage::Recordset out = a;
  out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
  return out;
}

namespace {

Value combine(sql::AggFn fn, const Value& a, const Value& b) {
  if (is_null(a)) return b;
  if (is_null(b)) return a;
  auto as_double = [](const Value& v) {
    return std::holds_alternative<double>(v) ? std::get<double>(v)
                                             : static_cast<double>(std::get<std::int64_t>(v));
  };
  switch (fn) {
    case sql::AggFn::Sum:
    case sql::AggFn::Count:
      if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
        return std::get<std::int64_t>(a) + std::get<std::int64_t>(b);
      return as_double(a) + as_double(b);
    case sql::AggFn::Min:
      return compare_values(b, CmpOp::Lt, a) == Tri::True ? b : a;
    case sql::AggFn::Max:
      return compare_values(b, CmpOp::Gt, a) == Tri::True ? b : a;
    case sql::AggFn::Avg:
      fail(Errc::SignatureMismatch, "avg partials cannot be merged; rewrite first");
  }
  return a;
}

}  // namespace

storage::Row merge_aggregate_rows(const std::vector<sql::AggFn>& signature, const storage::Row& a,
                                  const storage::Row& b) {
  if (a.size() != signature.size() || b.size() != signature.size())
    fail(Errc::SignatureMismatch, "aggregate partial arity differs from signature");
  storage::Row out;
  for (std::size_t i = 0; i < signature.size(); ++i) out.push_back(combine(signature[i], a[i], b[i]));
  return out;
}

storage::Recordset reconstruct_aggregates(const std::vector<sql::OutputSlot>& slots,
                                          const storage::Recordset& merged) {
  if (merged.rows.size() != 1)
    fail(Errc::SignatureMismatch, "aggregate reconstruction expects exactly one row");
  const storage::Row& row = merged.rows.front();

  storage::Recordset out;
  storage::Row result;
  for (const auto& slot : slots) {
    if (!slot.is_avg) {
      out.columns.push_back({slot.label, merged.columns[slot.pos].type});
      result.push_back(row[slot.pos]);
      continue;
    }
    out.columns.push_back({slot.label, ColumnType::Real});
    const Value& sum = row[slot.sum_pos];
    const Value& count = row[slot.count_pos];
    std::int64_t n = is_null(count) ? 0 : std::get<std::int64_t>(count);
    if (n == 0 || is_null(sum)) {
      result.push_back(Value{});
    } else {
      double s = std::holds_alternative<double>(sum)
                     ? std::get<double>(sum)
                     : static_cast<double>(std::get<std::int64_t>(sum));
      result.push_back(s / static_cast<double>(n));
    }
  }
  out.rows.push_back(std::move(result));
  return out;
}

void MergeBuffer::add(const storage::Recordset& part, const std::vector<Key128>& from) {
  if (!has_data) {
    accumulated = part;
    has_data = true;
  } else if (aggregate) {
    if (accumulated.columns != part.columns)
      fail(Errc::SchemaMismatch, "aggregate partial columns differ");
    accumulated.rows.front() =
        merge_aggregate_rows(signature, accumulated.rows.front(), part.rows.front());
  } else {
    accumulated = merge_recordsets(accumulated, part);
  }
  for (const auto& peer : from) contributors.insert(peer);
}

}  // namespace idss::merge
