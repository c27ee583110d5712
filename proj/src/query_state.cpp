#include "idss/query_state.hpp"

#include "idss/storage.hpp"

namespace idss::query_state {

Uqi new_uqi(const std::string& canonical_sql, PeerId initiator, std::uint64_t submission_counter,
            std::uint64_t seed) {
  std::string material = canonical_sql;
  material += '\x1f';
  material += initiator.hex();
  material += '\x1f';
  material += std::to_string(submission_counter);
  material += '\x1f';
  material += std::to_string(seed);
  return Uqi{hash128(material)};
}

const char* state_name(State s) {
  switch (s) {
    case State::Queued: return "QUEUED";
    case State::LocallyExecuted: return "LOCALLY_EXECUTED";
    case State::Completed: return "COMPLETED";
    case State::SentBack: return "SENT_BACK";
    case State::Failed: return "FAILED";
  }
  return "?";
}

State QueryRecord::state() const {
  if (failed) return State::Failed;
  if (sent_back) return State::SentBack;
  if (completed) return State::Completed;
  if (local_exec) return State::LocallyExecuted;
  return State::Queued;
}

void transition(QueryRecord& record, State to) {
  State from = record.state();
  auto illegal = [&]() -> void {
    fail(Errc::IllegalTransition,
         std::string(state_name(from)) + " -> " + state_name(to) + " (uqi " + record.uqi.hex() + ")");
  };

  switch (to) {
    case State::LocallyExecuted:
      if (from != State::Queued) illegal();
      record.local_exec = true;
      return;
    case State::Completed:
      if (from != State::LocallyExecuted) illegal();
      record.completed = true;
      return;
    case State::SentBack:
      if (record.is_initiator())
        fail(Errc::SentBackOnInitiator, "uqi " + record.uqi.hex());
      if (from != State::Completed) illegal();
      record.sent_back = true;
      return;
    case State::Failed:
      if (from == State::Failed || from == State::SentBack) illegal();
      record.failed = true;
      return;
    case State::Queued:
      illegal();
  }
}

InsertResult QueryTable::record_if_new(QueryRecord record) {
  if (by_uqi_.contains(record.uqi.key)) return InsertResult::Duplicate;
  record.id_query = next_id_++;
  by_uqi_.emplace(record.uqi.key, records_.size());
  records_.push_back(std::move(record));
  return InsertResult::Inserted;
}

QueryRecord& QueryTable::at(const Uqi& uqi) {
  auto it = by_uqi_.find(uqi.key);
  if (it == by_uqi_.end()) fail(Errc::UnknownUqi, uqi.hex());
  return records_[it->second];
}

const QueryRecord& QueryTable::at(const Uqi& uqi) const {
  auto it = by_uqi_.find(uqi.key);
  if (it == by_uqi_.end()) fail(Errc::UnknownUqi, uqi.hex());
  return records_[it->second];
}

std::string QueryTable::dump_csv() const {
  std::string out = "id_query,uqi,value,arrival_time,TTL,sender_key,local_exec,completed,sent_back,failed\n";
  for (const auto& r : records_) {
    out += std::to_string(r.id_query);
    out += ',' + r.uqi.hex();
    out += ',' + storage::csv_escape(r.value);
    out += ',' + std::to_string(r.arrival_time);
    out += ',' + std::to_string(r.ttl);
    out += ',' + (r.is_initiator() ? std::string() : r.sender_key.hex());
    out += r.local_exec ? ",1" : ",0";
    out += r.completed ? ",1" : ",0";
    out += r.sent_back ? ",1" : ",0";
    out += r.failed ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

}  // namespace idss::query_state
