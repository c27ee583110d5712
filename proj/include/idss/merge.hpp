#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "idss/key128.hpp"
#include "idss/sql/plan.hpp"
#include "idss/storage.hpp"

namespace idss::merge {

// Per-hop multiplicative TTL decay (default 3/4), floored to integer ms.
struct DecayFactor {
  std::int64_t num = 3;
  std::int64_t den = 4;
};

std::int64_t ttl_decay(std::int64_t old_ttl_ms, DecayFactor x = {});

// Concatenation; schemas must match exactly. No deduplication.
storage::Recordset merge_recordsets(const storage::Recordset& a, const storage::Recordset& b);

// Combines two one-row aggregate partials positionally: sum/count add
// (null-skipping), min/max take the extremum; all-null stays null.
storage::Row merge_aggregate_rows(const std::vector<sql::AggFn>& signature, const storage::Row& a,
                                  const storage::Row& b);

// Applies the avg reconstruction (sum/count, count 0 -> null) and projects
// the rewritten one-row partial back onto the user's original column list.
storage::Recordset reconstruct_aggregates(const std::vector<sql::OutputSlot>& slots,
                                          const storage::Recordset& merged);

// Accumulates a subtree's intermediate results until the deadline fires or
// every forwarded child has answered.
struct MergeBuffer {
  Key128 uqi;
  std::int64_t deadline = 0;  // arrival_time + ttl, fixed at creation
  storage::Recordset accumulated;
  bool has_data = false;
  bool aggregate = false;
  std::vector<sql::AggFn> signature;
  std::set<Key128> contributors;
  int children_expected = 0;
  int children_received = 0;
  bool local_done = false;
  bool closed = false;

  bool ready() const { return local_done && children_received >= children_expected; }
  void add(const storage::Recordset& part, const std::vector<Key128>& from);
};

}  // namespace idss::merge
