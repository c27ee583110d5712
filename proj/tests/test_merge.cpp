#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "idss/merge.hpp"
#include "idss/sql/parser.hpp"
#include "idss/sql/plan.hpp"

using namespace idss;
using namespace idss::merge;
using sql::AggFn;
using storage::Recordset;
using storage::Row;

namespace {

Recordset plain_set(std::vector<Row> rows) {
  Recordset r;
  r.columns = {{"node", ColumnType::Text}, {"load", ColumnType::Real}};
  r.rows = std::move(rows);
  return r;
}

Recordset agg_set(Row row, std::vector<storage::ColumnDef> cols) {
  Recordset r;
  r.columns = std::move(cols);
  r.rows.push_back(std::move(row));
  return r;
}

}  // namespace

TEST_CASE("ttl decays multiplicatively with integer flooring") {
  CHECK(ttl_decay(100) == 75);
  CHECK(ttl_decay(64000) == 48000);
  CHECK(ttl_decay(48000) == 36000);
  CHECK(ttl_decay(36000) == 27000);
  CHECK(ttl_decay(10) == 7);   // floor(7.5)
  CHECK(ttl_decay(1) == 0);    // decays out: forwarding stops
  CHECK(ttl_decay(0) == 0);
  CHECK(ttl_decay(100, DecayFactor{1, 2}) == 50);
  CHECK_THROWS_AS(ttl_decay(-1), Error);
}

TEST_CASE("plain recordsets concatenate only under identical schemas") {
  Recordset a = plain_set({{"a", 1.0}});
  Recordset b = plain_set({{"b", 2.0}, {"c", 3.0}});
  Recordset merged = merge_recordsets(a, b);
  CHECK(merged.rows.size() == 3);
  CHECK(merged.columns == a.columns);

  Recordset other;
  other.columns = {{"node", ColumnType::Text}};
  CHECK_THROWS_AS(merge_recordsets(a, other), Error);
}

TEST_CASE("aggregate partials combine positionally and skip nulls") {
  std::vector<AggFn> sig{AggFn::Sum, AggFn::Count, AggFn::Min, AggFn::Max};
  Row a{std::int64_t{10}, std::int64_t{2}, 3.5, 9.0};
  Row b{std::int64_t{20}, std::int64_t{3}, 1.5, 7.0};
  Row m = merge_aggregate_rows(sig, a, b);
  CHECK(std::get<std::int64_t>(m[0]) == 30);  // integer sums stay integral
  CHECK(std::get<std::int64_t>(m[1]) == 5);
  CHECK(std::get<double>(m[2]) == doctest::Approx(1.5));
  CHECK(std::get<double>(m[3]) == doctest::Approx(9.0));

  Row empty{Value{}, std::int64_t{0}, Value{}, Value{}};  // a peer with no matching rows
  Row m2 = merge_aggregate_rows(sig, m, empty);
  CHECK(std::get<std::int64_t>(m2[0]) == 30);
  CHECK(std::get<double>(m2[2]) == doctest::Approx(1.5));

  // avg never crosses the wire; partials carry sum/count instead
  CHECK_THROWS_AS(merge_aggregate_rows({AggFn::Avg}, Row{1.0}, Row{2.0}), Error);
}

TEST_CASE("avg reconstruction divides merged sums by merged counts") {
  auto rw = sql::rewrite_avg(sql::parse("SELECT avg(load), count(*) FROM t"));
  // merged partials: sum(load)=30, count(load)=5, count(*)=6
  Recordset merged = agg_set({std::int64_t{30}, std::int64_t{5}, std::int64_t{6}},
                             {{"sum(load)", ColumnType::Integer},
                              {"count(load)", ColumnType::Integer},
                              {"count(*)", ColumnType::Integer}});
  Recordset out = reconstruct_aggregates(rw.slots, merged);
  REQUIRE(out.rows.size() == 1);
  CHECK(out.columns[0].name == "avg(load)");
  CHECK(out.columns[0].type == ColumnType::Real);
  CHECK(std::get<double>(out.rows[0][0]) == doctest::Approx(6.0));
  CHECK(std::get<std::int64_t>(out.rows[0][1]) == 6);

  // a count of zero means no contributing values anywhere: avg is null
  Recordset zero = agg_set({Value{}, std::int64_t{0}, std::int64_t{0}}, merged.columns);
  CHECK(is_null(reconstruct_aggregates(rw.slots, zero).rows[0][0]));
}

TEST_CASE("merging partials equals aggregating the union (partition invariance)") {
  // dataset {2, 4, 6, 8, 10} split 2|3 across two peers
  std::vector<AggFn> sig{AggFn::Sum, AggFn::Count, AggFn::Min, AggFn::Max};
  Row left{std::int64_t{6}, std::int64_t{2}, std::int64_t{2}, std::int64_t{4}};
  Row right{std::int64_t{24}, std::int64_t{3}, std::int64_t{6}, std::int64_t{10}};
  Row whole{std::int64_t{30}, std::int64_t{5}, std::int64_t{2}, std::int64_t{10}};
  CHECK(merge_aggregate_rows(sig, left, right) == whole);
  CHECK(merge_aggregate_rows(sig, right, left) == whole);  // commutative
}

TEST_CASE("a merge buffer is ready once local work and all children are in") {
  MergeBuffer buf;
  buf.deadline = 1000;
  buf.children_expected = 2;
  CHECK_FALSE(buf.ready());

  buf.add(plain_set({{"a", 1.0}}), {hash128("self")});
  buf.local_done = true;
  CHECK_FALSE(buf.ready());

  buf.add(plain_set({{"b", 2.0}}), {hash128("c1")});
  buf.children_received = 1;
  CHECK_FALSE(buf.ready());

  buf.add(plain_set({{"c", 3.0}}), {hash128("c2"), hash128("c3")});
  buf.children_received = 2;
  CHECK(buf.ready());
  CHECK(buf.accumulated.rows.size() == 3);
  CHECK(buf.contributors.size() == 4);  // self + c1 + c2 + c3
}
