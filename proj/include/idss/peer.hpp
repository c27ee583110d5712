#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "idss/exec.hpp"
#include "idss/merge.hpp"
#include "idss/metrics.hpp"
#include "idss/overlay.hpp"
#include "idss/query_state.hpp"
#include "idss/sql/plan.hpp"
#include "idss/storage.hpp"

namespace idss::peer {

using overlay::PeerId;
using query_state::Uqi;

enum class Strategy { IntermediateCollector, InitiatorCollector };

struct PeerConfig {
  int fanout = 3;
  merge::DecayFactor decay{};
  Strategy strategy = Strategy::IntermediateCollector;
  bool fail_local_exec = false;  // fault injection: every local execution fails
  bool mutate_merge = false;     // test fixture: corrupts incoming sum partials
};

struct QueryStatus {
  Uqi uqi;
  query_state::State state = query_state::State::Queued;
  std::optional<storage::Recordset> result;  // present iff COMPLETED on the initiator
  std::string failure_reason;
};

// Simulation-side wiring shared by the peers of one overlay.
struct PeerContext {
  overlay::EventLoop* loop = nullptr;
  overlay::Transport* transport = nullptr;
  overlay::Ring* ring = nullptr;
  Metrics* metrics = nullptr;
  std::uint64_t seed = 0;
};

// One overlay node: storage, QUERY table, merge buffers and the full
// submit / broadcast / execute / merge / send-back lifecycle. All handlers
// run serially on the owning event loop.
class PeerNode {
 public:
  PeerNode(PeerId id, storage::Catalog catalog, PeerConfig config, PeerContext ctx);

  PeerId id() const { return id_; }
  storage::Catalog& catalog() { return catalog_; }
  const query_state::QueryTable& query_table() const { return table_; }
  PeerConfig& config() { return config_; }

  // Asynchronous submission: validates, records, broadcasts and schedules
  // local execution, returning the UQI immediately. Parse/classification
  // errors and InvalidTtl throw synchronously; nothing is broadcast then.
  Uqi submit_query(const std::string& sql, std::int64_t ttl_ms);

  void deliver(const overlay::OverlayMessage& msg);

  QueryStatus fetch_results(const Uqi& uqi) const;

 private:
  struct ActiveQuery {
    sql::ExecutablePlan plan;
    merge::MergeBuffer buffer;
    PeerId reply_to;        // kInitiatorSentinel when this peer initiated the uqi
    PeerId initiator;       // result destination under InitiatorCollector
    bool direct_return = false;  // overlay node under InitiatorCollector
    bool early_ok = true;        // early completion when all children answered
  };

  struct PhaseRef {
    std::size_t job = 0;
    int sub_index = -1;  // -1 marks the parent phase
  };

  struct NestedJob {
    Uqi user_uqi;
    sql::QueryPlan plan;
    std::vector<Uqi> sub_uqis;
    std::vector<std::optional<storage::Recordset>> sub_results;
    std::vector<sql::BoundSubquery> bound;
    std::int64_t parent_ttl = 0;
    bool failed = false;
  };

  void start_distributed(const Uqi& uqi, const std::string& sql_text, sql::ExecutablePlan plan,
                         std::int64_t ttl_ms);
  int forward(const Uqi& uqi, const std::string& sql_text, std::int64_t ttl_ms, PeerId initiator);
  void run_local(const Uqi& uqi);
  void on_deadline(const Uqi& uqi);
  void complete(const Uqi& uqi);
  void fail_query(const Uqi& uqi, const std::string& reason);

  void handle_broadcast(const overlay::QueryBroadcast& msg);
  void handle_result(const overlay::ResultReturn& msg);

  void on_initiator_complete(const Uqi& uqi, const merge::MergeBuffer& buffer);
  void nested_phase_complete(const PhaseRef& ref, const Uqi& phase_uqi,
                             const merge::MergeBuffer& buffer);
  void start_parent_phase(NestedJob& job);
  void finalize_nested(NestedJob& job, const storage::Recordset& parent_rows,
                       const merge::MergeBuffer& buffer);
  storage::Recordset refilter_and_project(const NestedJob& job, const storage::Recordset& widened);

  QueryMetrics& metrics_for(const Uqi& uqi) { return ctx_.metrics->for_query(uqi.key); }

  PeerId id_;
  storage::Catalog catalog_;
  PeerConfig config_;
  PeerContext ctx_;
  query_state::QueryTable table_;
  std::unordered_map<Key128, ActiveQuery> active_;
  std::unordered_map<Key128, storage::Recordset> results_;
  std::unordered_map<Key128, std::string> fail_reasons_;
  std::unordered_map<Key128, sql::QueryPlan> finalize_plans_;  // plain user queries
  std::unordered_map<Key128, PhaseRef> phase_of_;
  std::vector<NestedJob> jobs_;
  std::uint64_t submission_counter_ = 0;
};

}  // namespace idss::peer
