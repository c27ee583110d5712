#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "idss/error.hpp"
#include "idss/key128.hpp"

namespace idss::query_state {

using PeerId = Key128;

// Reserved all-zeros PeerId marking "this peer initiated the query".
inline constexpr PeerId kInitiatorSentinel{};

struct Uqi {
  Key128 key;

  auto operator<=>(const Uqi&) const = default;
  std::string hex() const { return key.hex(); }
};

// Deterministic per-submission identifier: same inputs, same Uqi everywhere.
Uqi new_uqi(const std::string& canonical_sql, PeerId initiator, std::uint64_t submission_counter,
            std::uint64_t seed);

enum class State { Queued, LocallyExecuted, Completed, SentBack, Failed };
const char* state_name(State s);

struct QueryRecord {
  std::int64_t id_query = 0;
  Uqi uqi;
  std::string value;             // SQL text as received
  std::int64_t arrival_time = 0; // virtual-clock ms
  std::int64_t ttl = 0;          // ms
  PeerId sender_key;             // kInitiatorSentinel on the initiator
  bool local_exec = false;
  bool completed = false;
  bool sent_back = false;
  bool failed = false;

  bool is_initiator() const { return sender_key == kInitiatorSentinel; }
  State state() const;
};

enum class InsertResult { Inserted, Duplicate };

// Applies a legal state-machine edge and updates the flags. Throws
// IllegalTransition otherwise, and SentBackOnInitiator when SENT_BACK is
// requested on the initiator's record.
void transition(QueryRecord& record, State to);

// The per-peer QUERY table, keyed by UQI. Never evicts within a run.
class QueryTable {
 public:
  InsertResult record_if_new(QueryRecord record);

  bool contains(const Uqi& uqi) const { return by_uqi_.contains(uqi.key); }
  QueryRecord& at(const Uqi& uqi);
  const QueryRecord& at(const Uqi& uqi) const;
  const std::vector<QueryRecord>& records() const { return records_; }

  std::string dump_csv() const;

 private:
  std::vector<QueryRecord> records_;
  std::unordered_map<Key128, std::size_t> by_uqi_;
  std::int64_t next_id_ = 1;
};

}  // namespace idss::query_state
