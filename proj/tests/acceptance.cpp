// Acceptance gate: each criterion prints exactly one PASS/FAIL line. The
// process exits nonzero when any criterion fails.
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "idss/harness.hpp"
#include "idss/merge.hpp"
#include "idss/sql/parser.hpp"
#include "idss/sql/plan.hpp"

using namespace idss;
using harness::make_baseline;
using harness::run_scenario;
using harness::ScenarioConfig;
using harness::Simulation;
using query_state::State;
using query_state::Uqi;

namespace {

constexpr double kTol = 1e-9;  // numeric tolerance for result comparison
int failures = 0;

void criterion(int n, const std::string& what, const std::function<bool()>& check) {
  bool ok = false;
  std::string err;
  try {
    ok = check();
  } catch (const std::exception& e) {
    err = e.what();
  }
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what;
  if (!err.empty()) std::cout << " [" << err << "]";
  std::cout << std::endl;
  if (!ok) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig lossless(int peers, std::uint64_t seed) {
  ScenarioConfig cfg = make_baseline(peers, seed);
  cfg.loss = 0.0;
  return cfg;
}

bool check_ttl_decay() {
  bool ok = merge::ttl_decay(100) == 75;
  std::int64_t t = 64000;
  for (std::int64_t want : {48000, 36000, 27000}) ok = ok && (t = merge::ttl_decay(t)) == want;
  ok = ok && merge::ttl_decay(10) == 7;  // floor, not round
  ok = ok && merge::ttl_decay(1) == 0 && merge::ttl_decay(0) == 0;
  std::int64_t chain = 64000;
  int hops = 0;
  while (chain > 0 && hops < 200) {
    chain = merge::ttl_decay(chain);
    ++hops;
  }
  return ok && chain == 0 && hops < 200;  // decay always terminates forwarding
}

bool check_avg_rewrite() {
  auto rw = sql::rewrite_avg(sql::parse("SELECT avg(load), max(load) FROM tb_cpu_dynamic"));
  if (sql::render(rw.query) != "SELECT sum(load), count(load), max(load) FROM tb_cpu_dynamic")
    return false;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    ScenarioConfig cfg = lossless(8, seed);
    cfg.workload = {{0, static_cast<int>(seed % 8),
                     "SELECT avg(load), avg(freq), max(load) FROM tb_cpu_dynamic", 64000}};
    if (!run_scenario(cfg).all_match()) return false;
  }
  return true;
}

bool check_broadcast_scale() {
  auto t0 = std::chrono::steady_clock::now();
  for (int n : {2, 8, 64, 1024}) {
    ScenarioConfig cfg = lossless(n, 7);
    cfg.workload = {{0, 0, "SELECT count(*) FROM tb_cpu_dynamic", 64000}};
    Simulation sim(cfg);
    Uqi uqi = sim.submit(0, cfg.workload[0].sql, cfg.workload[0].ttl_ms);
    sim.run();
    const auto& m = sim.metrics().for_query(uqi.key);
    if (m.inserted_count != n) return false;
    if (n >= 8 && m.duplicates_suppressed < 1) return false;
    for (int i = 0; i < n; ++i)
      if (sim.node(i).query_table().records().size() != 1) return false;
  }
  return elapsed_s(t0) < 60.0;
}

bool check_oracle_equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> queries = {
      "SELECT * FROM tb_node_static",
      "SELECT node, load FROM tb_cpu_dynamic "
      "WHERE load > 25 AND NOT freq < 1200 OR node IN ('node1', 'node2')",
      "SELECT sum(freq), count(*), min(load), max(load) FROM tb_cpu_dynamic WHERE load >= 10",
      "SELECT avg(load), avg(freq), count(load) FROM tb_cpu_dynamic",
      "SELECT node FROM tb_node_static WHERE cores > (SELECT avg(load) FROM tb_cpu_dynamic)",
      "SELECT load FROM tb_cpu_dynamic "
      "WHERE node IN (SELECT node FROM tb_node_static WHERE cores >= 8)",
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int peers : {8, 64}) {
      ScenarioConfig cfg = lossless(peers, seed);
      for (std::size_t q = 0; q < queries.size(); ++q)
        cfg.workload.push_back({static_cast<std::int64_t>(100 * q),
                                static_cast<int>((seed + q) % peers), queries[q], 128000});
      if (!run_scenario(cfg).all_match()) return false;
    }
  }
  return elapsed_s(t0) < 120.0;
}

bool check_subset_soundness() {
  int runs = 0;
  for (double loss : {0.1, 0.3}) {
    for (std::int64_t ttl : {4000, 16000}) {
      for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        ScenarioConfig cfg = make_baseline(8, seed);
        cfg.loss = loss;
        cfg.workload = {
            {0, 0, "SELECT node, load FROM tb_cpu_dynamic WHERE load >= 0", ttl},
            {0, 1, "SELECT count(*), max(load) FROM tb_cpu_dynamic", ttl},
        };
        auto rep = run_scenario(cfg);
        ++runs;
        const auto& plain = rep.outcomes[0];
        if (plain.state != State::Completed || !plain.result) return false;
        if (!harness::rows_subset(*plain.result, plain.expected, kTol)) return false;

        const auto& agg = rep.outcomes[1];
        if (agg.state != State::Completed || !agg.result) return false;
        auto count = std::get<std::int64_t>(agg.result->rows[0][0]);
        auto want_count = std::get<std::int64_t>(agg.expected.rows[0][0]);
        if (count < 1 || count > want_count) return false;
        const Value& got_max = agg.result->rows[0][1];
        const Value& want_max = agg.expected.rows[0][1];
        if (!is_null(got_max) &&
            compare_values(got_max, CmpOp::Le, want_max) != Tri::True)
          return false;
      }
    }
  }
  return runs == 100;
}

bool check_ttl_sweep_monotone() {
  ScenarioConfig cfg = lossless(8, 4);
  cfg.latency = {20, 20};  // fixed latency keeps inclusion deterministic in the ttl
  cfg.workload = {{0, 0, "SELECT count(*) FROM tb_cpu_dynamic", 0}};
  auto pts = harness::sweep_ttl(cfg, {1, 30, 120, 500, 2000, 8000, 64000});
  if (pts.front().mean_peers_included != 1.0) return false;  // decays out at hop one
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].mean_peers_included < pts[i - 1].mean_peers_included) return false;
  return pts.back().mean_peers_included == 8.0;
}

bool check_state_machine_fuzz() {
  using query_state::QueryRecord;
  using query_state::transition;
  std::mt19937_64 rng(2024);
  const State all[] = {State::Queued, State::LocallyExecuted, State::Completed, State::SentBack,
                       State::Failed};
  auto legal = [](State from, State to, bool initiator) {
    if (to == State::Failed)
      return from == State::Queued || from == State::LocallyExecuted || from == State::Completed;
    if (from == State::Queued) return to == State::LocallyExecuted;
    if (from == State::LocallyExecuted) return to == State::Completed;
    if (from == State::Completed) return to == State::SentBack && !initiator;
    return false;
  };

  long attempts = 0;
  while (attempts < 100'000) {
    bool initiator = rng() & 1;
    QueryRecord rec;
    rec.uqi = Uqi{hash128("fuzz")};
    rec.sender_key = initiator ? query_state::kInitiatorSentinel : hash128("sender");
    for (int step = 0; step < 8; ++step) {
      State from = rec.state();
      State to = all[rng() % 5];
      bool expect = legal(from, to, initiator);
      ++attempts;
      try {
        transition(rec, to);
        if (!expect) return false;  // an illegal edge was accepted
      } catch (const Error& e) {
        if (expect) return false;  // a legal edge was rejected
        if (initiator && from == State::Completed && to == State::SentBack &&
            e.code() != Errc::SentBackOnInitiator)
          return false;
        if (rec.state() != from) return false;  // failed transitions must not mutate
      }
      if (rec.state() == State::Failed || rec.state() == State::SentBack) break;
    }
  }
  return true;
}

// Descendants of `root` in the first-delivery broadcast tree, root included.
std::size_t subtree_size(const std::map<Key128, Key128>& parent, Key128 root) {
  std::size_t count = 1;
  for (const auto& [child, _] : parent) {
    Key128 cur = child;
    for (std::size_t hop = 0; hop <= parent.size(); ++hop) {
      if (cur == root) {
        if (child != root) ++count;
        break;
      }
      auto it = parent.find(cur);
      if (it == parent.end()) break;
      cur = it->second;
    }
  }
  return count;
}

bool check_fault_isolation() {
  const std::string sql = "SELECT node FROM tb_cpu_dynamic";
  {
    ScenarioConfig cfg = lossless(8, 4);
    cfg.latency = {20, 20};  // identical timing with and without the fault

    Simulation clean(cfg);
    Uqi uqi = clean.submit(0, sql, 64000);
    clean.run();
    if (clean.metrics().for_query(uqi.key).peers_included != 8) return false;
    auto tree = clean.metrics().for_query(uqi.key).tree_parent;
    std::size_t lost = subtree_size(tree, clean.node(3).id());

    cfg.exec_fault_peers = {3};
    Simulation faulty(cfg);
    Uqi uqi2 = faulty.submit(0, sql, 64000);
    faulty.run();
    if (uqi2 != uqi) return false;  // same seed, same identifier
    for (int i = 0; i < 8; ++i) {
      State s = faulty.node(i).query_table().at(uqi).state();
      if ((i == 3) != (s == State::Failed)) return false;
    }
    auto status = faulty.node(0).fetch_results(uqi);
    if (status.state != State::Completed || !status.result) return false;
    if (faulty.metrics().for_query(uqi.key).peers_included != static_cast<int>(8 - lost))
      return false;
  }
  {
    ScenarioConfig cfg = lossless(2, 4);
    cfg.latency = {20, 20};
    cfg.exec_fault_peers = {1};  // the only other peer: a leaf of the tree
    Simulation sim(cfg);
    Uqi uqi = sim.submit(0, sql, 64000);
    sim.run();
    if (sim.node(1).query_table().at(uqi).state() != State::Failed) return false;
    auto status = sim.node(0).fetch_results(uqi);
    if (status.state != State::Completed) return false;
    if (sim.metrics().for_query(uqi.key).peers_included != 1) return false;
  }
  return true;
}

bool check_determinism() {
  ScenarioConfig cfg = make_baseline(16, 19);
  cfg.loss = 0.2;
  cfg.workload = {
      {0, 0, "SELECT node, load FROM tb_cpu_dynamic WHERE load > 40", 32000},
      {50, 5, "SELECT sum(freq), count(*) FROM tb_cpu_dynamic", 32000},
      {90, 9, "SELECT avg(load) FROM tb_cpu_dynamic WHERE freq > 1500", 32000},
  };
  auto r1 = run_scenario(cfg);
  auto r2 = run_scenario(cfg);
  if (r1.log_digest != r2.log_digest) return false;
  if (r1.to_text() != r2.to_text()) return false;
  for (std::size_t i = 0; i < r1.outcomes.size(); ++i) {
    const auto &a = r1.outcomes[i], &b = r2.outcomes[i];
    if (a.result.has_value() != b.result.has_value()) return false;
    if (a.result && a.result->to_csv() != b.result->to_csv()) return false;
  }
  cfg.seed = 20;
  return run_scenario(cfg).log_digest != r1.log_digest;
}

bool check_collector_strategies() {
  const std::string sql = "SELECT sum(freq), count(*) FROM tb_cpu_dynamic";
  ScenarioConfig cfg = lossless(64, 2);
  cfg.workload = {{0, 0, sql, 128000}};

  cfg.strategy = peer::Strategy::InitiatorCollector;
  auto direct = run_scenario(cfg);
  if (!direct.all_match()) return false;
  if (direct.outcomes[0].metrics.initiator_inbound_results != 63) return false;

  cfg.strategy = peer::Strategy::IntermediateCollector;
  auto tree = run_scenario(cfg);
  if (!tree.all_match()) return false;
  return tree.outcomes[0].metrics.initiator_inbound_results <= cfg.fanout;
}

}  // namespace

int main() {
  criterion(1, "ttl decays by 3/4 per hop with flooring and always reaches zero",
            check_ttl_decay);
  criterion(2, "avg(c) travels as sum(c), count(c) and reconstructs exactly (50 seeded runs)",
            check_avg_rewrite);
  criterion(3, "broadcast reaches 2/8/64/1024 peers with one record each and duplicates "
               "suppressed, within 60s",
            check_broadcast_scale);
  criterion(4, "distributed answers equal the central oracle for every query kind "
               "(20 seeds x 8 and 64 peers), within 120s",
            check_oracle_equivalence);
  criterion(5, "with loss 0.1/0.3 and truncated ttls every answer is a sound subset "
               "(100 runs)",
            check_subset_soundness);
  criterion(6, "peer inclusion grows monotonically with the ttl; a ttl that decays out "
               "at hop one includes only the initiator",
            check_ttl_sweep_monotone);
  criterion(7, "100k fuzzed transitions accept exactly the legal state-machine edges",
            check_state_machine_fuzz);
  criterion(8, "a faulted peer fails alone and the initiator completes minus that subtree",
            check_fault_isolation);
  criterion(9, "equal seeds reproduce event logs and results bit for bit",
            check_determinism);
  criterion(10, "the initiator hears all 63 peers directly under one strategy, at most "
                "fanout children under the other, with equal answers",
            check_collector_strategies);

  if (failures) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
