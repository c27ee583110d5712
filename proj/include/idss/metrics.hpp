#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "idss/key128.hpp"

namespace idss {

struct QueryMetrics {
  int peers_included = 0;
  int duplicates_suppressed = 0;
  int late_or_lost = 0;
  std::int64_t completion_time = -1;  // virtual ms at initiator completion
  int messages_total = 0;             // delivered overlay messages for this uqi
  int inserted_count = 0;             // peers that recorded the uqi
  int initiator_inbound_results = 0;  // ResultReturns delivered to the initiator
  std::map<Key128, Key128> tree_parent;  // first-delivery parent per peer
};

// Per-run observability shared by all peers of one simulation.
class Metrics {
 public:
  QueryMetrics& for_query(const Key128& uqi) { return per_query_[uqi]; }
  const std::map<Key128, QueryMetrics>& all() const { return per_query_; }

 private:
  std::map<Key128, QueryMetrics> per_query_;
};

}  // namespace idss
