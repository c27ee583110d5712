#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "idss/merge.hpp"
#include "idss/metrics.hpp"
#include "idss/overlay.hpp"
#include "idss/peer.hpp"
#include "idss/storage.hpp"

namespace idss::harness {

using query_state::Uqi;

enum class Placement { RoundRobin, Block };

struct WorkloadItem {
  std::int64_t time = 0;  // virtual ms at submission
  int initiator = 0;      // peer index
  std::string sql;
  std::int64_t ttl_ms = 0;
};

struct ChurnEvent {
  std::int64_t time = 0;
  int peer = 0;  // fail-stop: the peer drops all traffic from `time` on
};

struct ScenarioConfig {
  int peers = 8;
  int fanout = 3;
  merge::DecayFactor decay{};
  overlay::LatencyModel latency{};
  double loss = 0.0;
  std::uint64_t seed = 1;
  std::int64_t horizon = 86'400'000;  // one virtual day
  peer::Strategy strategy = peer::Strategy::IntermediateCollector;

  std::vector<storage::TableSchema> schemas;
  // Full logical dataset per table; placement scatters rows across peers.
  std::map<std::string, std::vector<storage::Row>> data;
  Placement placement = Placement::RoundRobin;

  std::vector<int> exec_fault_peers;   // local execution always fails there
  int mutate_merge_peer = -1;          // corrupts incoming sum partials there
  std::vector<ChurnEvent> churn;
  std::vector<WorkloadItem> workload;
};

peer::Strategy strategy_from_name(const std::string& name);

// Loads {"tables":[{"name":..,"columns":[{"name","type","nullable"}]}]}.
std::vector<storage::TableSchema> load_schema_json(const std::string& path);

// Loads a full scenario description; data may be inline rows or CSV paths.
ScenarioConfig load_scenario_json(const std::string& path);

// Two-table synthetic workload fixture with seeded data: covers text, real,
// integer and timestamp columns plus scattered nulls.
ScenarioConfig make_baseline(int peers, std::uint64_t seed, int rows_per_table = 64);

// Ground truth: evaluates the query centrally over the union of all peers'
// data. Shares only the SQL parser with the distributed path.
storage::Recordset oracle(const std::string& sql, const storage::Catalog& union_catalog);

// Order-insensitive multiset comparison with numeric tolerance; column names
// and types must agree.
bool rows_equal(const storage::Recordset& a, const storage::Recordset& b, double tol = 1e-9);

// Every row of `sub` appears in `super` (multiset containment).
bool rows_subset(const storage::Recordset& sub, const storage::Recordset& super,
                 double tol = 1e-9);

// One overlay of in-process peers driven by a shared deterministic event
// loop and seeded transport.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  peer::PeerNode& node(int index);
  bool alive(int index) const { return alive_[static_cast<std::size_t>(index)]; }
  void fail_stop(int index);

  overlay::EventLoop& loop() { return loop_; }
  overlay::Transport& transport() { return *transport_; }
  const overlay::EventLog& log() const { return log_; }
  Metrics& metrics() { return metrics_; }

  Uqi submit(int initiator, const std::string& sql, std::int64_t ttl_ms);
  bool run();  // to quiescence; false when the horizon cut it short

  // Union of every peer's rows, for oracle evaluation.
  storage::Catalog union_catalog() const;

 private:
  ScenarioConfig config_;
  overlay::EventLoop loop_;
  overlay::EventLog log_;
  std::unique_ptr<overlay::Transport> transport_;
  overlay::Ring ring_;
  Metrics metrics_;
  std::vector<std::unique_ptr<peer::PeerNode>> nodes_;
  std::map<Key128, int> index_of_;
  std::vector<bool> alive_;
};

struct QueryOutcome {
  Uqi uqi;
  std::string sql;
  query_state::State state = query_state::State::Queued;
  std::optional<storage::Recordset> result;
  storage::Recordset expected;  // oracle rows over the union dataset
  QueryMetrics metrics;
  bool oracle_match = false;
  std::string failure_reason;
};

struct RunReport {
  std::vector<QueryOutcome> outcomes;
  Key128 log_digest;
  bool quiescent = true;

  bool all_match() const;
  std::string to_text() const;
  std::string metrics_csv() const;
};

RunReport run_scenario(const ScenarioConfig& config);

struct SweepPoint {
  std::int64_t ttl_ms = 0;
  double mean_peers_included = 0;
  double mean_completion_time = 0;
};

// Reruns the scenario once per TTL, applying it to every workload item.
std::vector<SweepPoint> sweep_ttl(ScenarioConfig base, const std::vector<std::int64_t>& ttls);

}  // namespace idss::harness
