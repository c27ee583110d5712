#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "idss/harness.hpp"

using namespace idss;
using harness::make_baseline;
using harness::ScenarioConfig;
using harness::Simulation;
using query_state::State;
using query_state::Uqi;

namespace {

constexpr std::int64_t kTtl = 64000;

ScenarioConfig lossless(int peers, std::uint64_t seed = 11) {
  ScenarioConfig cfg = make_baseline(peers, seed);
  cfg.loss = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("a two-peer query runs the full lifecycle on both sides") {
  Simulation sim(lossless(2));
  Uqi uqi = sim.submit(0, "SELECT node, load FROM tb_cpu_dynamic WHERE load > 10", kTtl);
  CHECK(sim.run());

  const auto& init_rec = sim.node(0).query_table().at(uqi);
  CHECK(init_rec.is_initiator());
  CHECK(init_rec.state() == State::Completed);

  const auto& remote_rec = sim.node(1).query_table().at(uqi);
  CHECK_FALSE(remote_rec.is_initiator());
  CHECK(remote_rec.state() == State::SentBack);
  CHECK(remote_rec.value == "SELECT node, load FROM tb_cpu_dynamic WHERE load > 10");

  auto status = sim.node(0).fetch_results(uqi);
  REQUIRE(status.result.has_value());
  CHECK(harness::rows_equal(*status.result,
                            harness::oracle(remote_rec.value, sim.union_catalog())));

  // results live on the initiator only
  CHECK_FALSE(sim.node(1).fetch_results(uqi).result.has_value());
}

TEST_CASE("duplicate broadcasts are recorded once and suppressed after") {
  Simulation sim(lossless(8));
  Uqi uqi = sim.submit(0, "SELECT count(*) FROM tb_cpu_dynamic", kTtl);
  sim.run();
  const auto& m = sim.metrics().for_query(uqi.key);
  CHECK(m.inserted_count == 8);
  CHECK(m.duplicates_suppressed >= 1);
  for (int i = 0; i < 8; ++i) CHECK(sim.node(i).query_table().records().size() == 1);
}

TEST_CASE("submission validates the ttl and the SQL before broadcasting") {
  Simulation sim(lossless(2));
  CHECK_THROWS_AS(sim.submit(0, "SELECT * FROM tb_cpu_dynamic", 0), Error);
  CHECK_THROWS_AS(sim.submit(0, "SELECT * FROM tb_cpu_dynamic", -5), Error);
  CHECK_THROWS_AS(sim.submit(0, "SELECT a FROM t GROUP BY a", kTtl), Error);
  CHECK_THROWS_AS(sim.submit(0, "not sql", kTtl), Error);
  CHECK(sim.log().lines().empty());  // nothing went out
}

TEST_CASE("fetching an unknown uqi is an error") {
  Simulation sim(lossless(2));
  CHECK_THROWS_AS(sim.node(0).fetch_results(Uqi{hash128("nope")}), Error);
}

TEST_CASE("aggregates merge across peers exactly as if the data were central") {
  for (const char* sql : {
           "SELECT count(*) FROM tb_cpu_dynamic",
           "SELECT sum(freq), min(load), max(load) FROM tb_cpu_dynamic WHERE load >= 0",
           "SELECT avg(load), avg(freq) FROM tb_cpu_dynamic",
       }) {
    Simulation sim(lossless(8));
    Uqi uqi = sim.submit(0, sql, kTtl);
    sim.run();
    auto status = sim.node(0).fetch_results(uqi);
    REQUIRE(status.result.has_value());
    CHECK(harness::rows_equal(*status.result, harness::oracle(sql, sim.union_catalog())));
  }
}

TEST_CASE("nested queries resolve subqueries first, then run the parent") {
  const std::string sql =
      "SELECT node FROM tb_node_static "
      "WHERE cores > (SELECT avg(load) FROM tb_cpu_dynamic) AND region = 'eu'";
  Simulation sim(lossless(8, 5));
  Uqi uqi = sim.submit(0, sql, kTtl);
  sim.run();
  auto status = sim.node(0).fetch_results(uqi);
  CHECK(status.state == State::Completed);
  REQUIRE(status.result.has_value());
  CHECK(harness::rows_equal(*status.result, harness::oracle(sql, sim.union_catalog())));
  // the user's uqi itself is never broadcast; only its phases are
  CHECK_FALSE(sim.node(1).query_table().contains(uqi));
}

TEST_CASE("in-subqueries bind as literal lists before the parent broadcast") {
  const std::string sql =
      "SELECT load FROM tb_cpu_dynamic "
      "WHERE node IN (SELECT node FROM tb_node_static WHERE cores >= 16)";
  Simulation sim(lossless(8, 6));
  Uqi uqi = sim.submit(0, sql, kTtl);
  sim.run();
  auto status = sim.node(0).fetch_results(uqi);
  REQUIRE(status.result.has_value());
  CHECK(harness::rows_equal(*status.result, harness::oracle(sql, sim.union_catalog())));
}

TEST_CASE("under the initiator-collector strategy peers reply straight to the source") {
  ScenarioConfig cfg = lossless(8);
  cfg.strategy = peer::Strategy::InitiatorCollector;
  cfg.workload = {{0, 0, "SELECT sum(freq) FROM tb_cpu_dynamic", kTtl}};
  auto rep = harness::run_scenario(cfg);
  const auto& o = rep.outcomes[0];
  CHECK(o.oracle_match);
  CHECK(o.metrics.initiator_inbound_results == 7);  // one direct reply per other peer

  // remote records end in SENT_BACK even though no intermediate merge happened
  ScenarioConfig cfg2 = lossless(8);
  cfg2.strategy = peer::Strategy::InitiatorCollector;
  Simulation sim(cfg2);
  Uqi uqi = sim.submit(0, "SELECT sum(freq) FROM tb_cpu_dynamic", kTtl);
  sim.run();
  for (int i = 1; i < 8; ++i) CHECK(sim.node(i).query_table().at(uqi).state() == State::SentBack);
}

TEST_CASE("a peer whose local execution faults fails alone") {
  ScenarioConfig cfg = lossless(8);
  cfg.exec_fault_peers = {3};
  Simulation sim(cfg);
  Uqi uqi = sim.submit(0, "SELECT node FROM tb_cpu_dynamic", kTtl);
  sim.run();
  for (int i = 0; i < 8; ++i) {
    State s = sim.node(i).query_table().at(uqi).state();
    if (i == 3) {
      CHECK(s == State::Failed);
      CHECK(sim.node(3).fetch_results(uqi).failure_reason.find("injected") !=
            std::string::npos);
    } else {
      CHECK(s != State::Failed);
    }
  }
  auto status = sim.node(0).fetch_results(uqi);
  CHECK(status.state == State::Completed);  // best effort: the query still completes
  REQUIRE(status.result.has_value());
  CHECK(harness::rows_subset(*status.result,
                             harness::oracle("SELECT node FROM tb_cpu_dynamic",
                                             sim.union_catalog())));
}

TEST_CASE("a failed subquery phase fails the user query with a cause") {
  ScenarioConfig cfg = lossless(2);
  cfg.exec_fault_peers = {0};  // the initiator cannot execute anything locally
  Simulation sim(cfg);
  Uqi uqi = sim.submit(
      0, "SELECT node FROM tb_node_static WHERE cores > (SELECT avg(load) FROM tb_cpu_dynamic)",
      kTtl);
  sim.run();
  auto status = sim.node(0).fetch_results(uqi);
  CHECK(status.state == State::Failed);
  CHECK(status.failure_reason.find("MissingSubqueryResult") != std::string::npos);
}

TEST_CASE("results straggling past the deadline are counted, not merged") {
  ScenarioConfig cfg = lossless(8);
  cfg.latency.min_ms = 400;
  cfg.latency.max_ms = 900;  // several hops cannot fit into the ttl below
  Simulation sim(cfg);
  Uqi uqi = sim.submit(0, "SELECT node FROM tb_cpu_dynamic", 3000);
  sim.run();
  const auto& m = sim.metrics().for_query(uqi.key);
  auto status = sim.node(0).fetch_results(uqi);
  CHECK(status.state == State::Completed);
  CHECK(m.peers_included < 8);
  REQUIRE(status.result.has_value());
  CHECK(harness::rows_subset(*status.result,
                             harness::oracle("SELECT node FROM tb_cpu_dynamic",
                                             sim.union_catalog())));
}

TEST_CASE("message loss shrinks the answer but never corrupts it") {
  ScenarioConfig cfg = make_baseline(8, 21);
  cfg.loss = 0.3;
  cfg.workload = {{0, 0, "SELECT node, load FROM tb_cpu_dynamic WHERE load >= 0", kTtl}};
  auto rep = harness::run_scenario(cfg);
  const auto& o = rep.outcomes[0];
  CHECK(o.state == State::Completed);
  REQUIRE(o.result.has_value());
  CHECK(harness::rows_subset(*o.result, o.expected));
}
