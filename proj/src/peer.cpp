#include "idss/peer.hpp"

#include <algorithm>
#include <limits>

#include "idss/sql/eval.hpp"
#include "idss/sql/parser.hpp"

namespace idss::peer {

using query_state::InsertResult;
using query_state::QueryRecord;
using query_state::State;
using query_state::kInitiatorSentinel;

PeerNode::PeerNode(PeerId id, storage::Catalog catalog, PeerConfig config, PeerContext ctx)
    : id_(id), catalog_(std::move(catalog)), config_(config), ctx_(ctx) {}

Uqi PeerNode::submit_query(const std::string& sql_text, std::int64_t ttl_ms) {
  if (ttl_ms <= 0) fail(Errc::InvalidTtl, "ttl must be positive");
  sql::Ast ast = sql::parse(sql_text);
  sql::QueryPlan plan = sql::build_plan(ast);

  Uqi uqi = query_state::new_uqi(sql::render(plan.original), id_, submission_counter_++, ctx_.seed);
  QueryRecord record;
  record.uqi = uqi;
  record.value = sql_text;
  record.arrival_time = ctx_.loop->now();
  record.ttl = ttl_ms;
  record.sender_key = kInitiatorSentinel;
  table_.record_if_new(std::move(record));
  metrics_for(uqi).inserted_count++;

  if (plan.kind != sql::PlanKind::Nested) {
    std::string wire = sql::render(plan.parent_template);
    sql::ExecutablePlan exec = sql::compile(sql::clone(plan.parent_template));
    finalize_plans_.emplace(uqi.key, std::move(plan));
    start_distributed(uqi, wire, std::move(exec), ttl_ms);
    return uqi;
  }

  // Two sequential distributed phases: all subqueries first (half the TTL,
  // split equally), then the parent skeleton with the other half.
  NestedJob job;
  job.user_uqi = uqi;
  std::size_t n_subs = plan.subplans.size();
  std::int64_t sub_ttl = (ttl_ms / 2) / static_cast<std::int64_t>(n_subs);
  job.parent_ttl = ttl_ms - ttl_ms / 2;
  job.sub_results.resize(n_subs);
  job.plan = std::move(plan);
  std::size_t job_index = jobs_.size();

  for (std::size_t i = 0; i < n_subs; ++i) {
    const auto& sub = job.plan.subplans[i];
    std::string wire = sql::render(sub.plan.query);
    Uqi sub_uqi = query_state::new_uqi(wire, id_, submission_counter_++, ctx_.seed);
    job.sub_uqis.push_back(sub_uqi);

    QueryRecord sub_record;
    sub_record.uqi = sub_uqi;
    sub_record.value = wire;
    sub_record.arrival_time = ctx_.loop->now();
    sub_record.ttl = sub_ttl;
    sub_record.sender_key = kInitiatorSentinel;
    table_.record_if_new(std::move(sub_record));
    metrics_for(sub_uqi).inserted_count++;
    phase_of_.emplace(sub_uqi.key, PhaseRef{job_index, static_cast<int>(i)});
  }
  jobs_.push_back(std::move(job));
  for (std::size_t i = 0; i < n_subs; ++i) {
    const auto& j = jobs_[job_index];
    start_distributed(j.sub_uqis[i], sql::render(j.plan.subplans[i].plan.query),
                      sql::ExecutablePlan{sql::clone(j.plan.subplans[i].plan.query),
                                          j.plan.subplans[i].plan.aggregate,
                                          j.plan.subplans[i].plan.signature},
                      sub_ttl);
  }
  return uqi;
}

int PeerNode::forward(const Uqi& uqi, const std::string& sql_text, std::int64_t ttl_ms,
                      PeerId initiator) {
  std::int64_t next_ttl = merge::ttl_decay(ttl_ms, config_.decay);
  if (next_ttl <= 0) return 0;  // decay to zero terminates forwarding
  std::vector<PeerId> children = ctx_.ring->broadcast_children(id_, config_.fanout);
  for (PeerId child : children) {
    overlay::OverlayMessage msg;
    msg.body = overlay::QueryBroadcast{uqi, sql_text, next_ttl, id_, initiator};
    msg.src = id_;
    msg.dst = child;
    msg.send_time = ctx_.loop->now();
    ctx_.transport->send(std::move(msg));
  }
  return static_cast<int>(children.size());
}

void PeerNode::start_distributed(const Uqi& uqi, const std::string& sql_text,
                                 sql::ExecutablePlan plan, std::int64_t ttl_ms) {
  ActiveQuery aq;
  aq.reply_to = kInitiatorSentinel;
  aq.initiator = id_;
  aq.buffer.uqi = uqi.key;
  aq.buffer.deadline = ctx_.loop->now() + ttl_ms;
  aq.buffer.aggregate = plan.aggregate;
  aq.buffer.signature = plan.signature;
  aq.buffer.children_expected = forward(uqi, sql_text, ttl_ms, id_);
  aq.early_ok = config_.strategy == Strategy::IntermediateCollector;
  aq.plan = std::move(plan);
  std::int64_t deadline = aq.buffer.deadline;
  active_.emplace(uqi.key, std::move(aq));

  ctx_.loop->at(ctx_.loop->now(), [this, uqi] { run_local(uqi); });
  ctx_.loop->at(deadline, [this, uqi] { on_deadline(uqi); });
}

void PeerNode::deliver(const overlay::OverlayMessage& msg) {
  if (const auto* b = std::get_if<overlay::QueryBroadcast>(&msg.body)) handle_broadcast(*b);
  else handle_result(std::get<overlay::ResultReturn>(msg.body));
}

void PeerNode::handle_broadcast(const overlay::QueryBroadcast& msg) {
  QueryMetrics& qm = metrics_for(msg.uqi);
  qm.messages_total++;

  QueryRecord record;
  record.uqi = msg.uqi;
  record.value = msg.sql;
  record.arrival_time = ctx_.loop->now();
  record.ttl = msg.ttl;
  record.sender_key = msg.sender;
  if (table_.record_if_new(std::move(record)) == InsertResult::Duplicate) {
    qm.duplicates_suppressed++;
    return;
  }
  qm.inserted_count++;
  qm.tree_parent[id_] = msg.sender;

  sql::ExecutablePlan plan;
  try {
    plan = sql::compile(sql::parse(msg.sql));
  } catch (const Error& e) {
    fail_query(msg.uqi, e.what());
    return;
  }

  int children = forward(msg.uqi, msg.sql, msg.ttl, msg.initiator);

  ActiveQuery aq;
  aq.reply_to = msg.sender;
  aq.initiator = msg.initiator;
  aq.direct_return = config_.strategy == Strategy::InitiatorCollector;
  aq.buffer.uqi = msg.uqi.key;
  aq.buffer.deadline = ctx_.loop->now() + msg.ttl;
  aq.buffer.aggregate = plan.aggregate;
  aq.buffer.signature = plan.signature;
  aq.buffer.children_expected = children;
  std::int64_t deadline = aq.buffer.deadline;
  bool direct = aq.direct_return;
  aq.plan = std::move(plan);
  active_.emplace(msg.uqi.key, std::move(aq));

  Uqi uqi = msg.uqi;
  ctx_.loop->at(ctx_.loop->now(), [this, uqi] { run_local(uqi); });
  if (!direct) ctx_.loop->at(deadline, [this, uqi] { on_deadline(uqi); });
}

void PeerNode::run_local(const Uqi& uqi) {
  auto it = active_.find(uqi.key);
  if (it == active_.end() || it->second.buffer.closed) return;
  ActiveQuery& aq = it->second;
  QueryRecord& record = table_.at(uqi);

  storage::Recordset local;
  try {
    if (config_.fail_local_exec) fail(Errc::TypeMismatch, "injected local execution fault");
    local = storage::execute_local(catalog_, aq.plan);
  } catch (const Error& e) {
    fail_query(uqi, e.what());
    return;
  }
  query_state::transition(record, State::LocallyExecuted);

  if (aq.direct_return) {
    // Initiator-collector: every overlay node returns its local result straight to the
    // initiator; no merge wait on intermediate nodes.
    query_state::transition(record, State::Completed);
    overlay::OverlayMessage msg;
    msg.body = overlay::ResultReturn{uqi, std::move(local), {id_}, id_};
    msg.src = id_;
    msg.dst = aq.initiator;
    msg.send_time = ctx_.loop->now();
    ctx_.transport->send(std::move(msg));
    query_state::transition(record, State::SentBack);
    aq.buffer.closed = true;
    return;
  }

  aq.buffer.add(local, {id_});
  aq.buffer.local_done = true;
  if (aq.early_ok && aq.buffer.ready()) complete(uqi);
}

void PeerNode::on_deadline(const Uqi& uqi) {
  auto it = active_.find(uqi.key);
  if (it == active_.end() || it->second.buffer.closed) return;
  complete(uqi);
}

void PeerNode::handle_result(const overlay::ResultReturn& msg) {
  QueryMetrics& qm = metrics_for(msg.uqi);
  qm.messages_total++;
  if (table_.contains(msg.uqi) && table_.at(msg.uqi).is_initiator())
    qm.initiator_inbound_results++;

  auto it = active_.find(msg.uqi.key);
  if (it == active_.end() || it->second.buffer.closed) {
    qm.late_or_lost++;  // late or unknown: silently discarded, but counted
    return;
  }
  ActiveQuery& aq = it->second;
  if (aq.buffer.has_data && aq.buffer.accumulated.columns != msg.rows.columns) {
    qm.late_or_lost++;  // defensive: cannot occur under the common schema
    return;
  }

  storage::Recordset part = msg.rows;
  if (config_.mutate_merge && aq.buffer.aggregate && !part.rows.empty()) {
    // Deliberate corruption fixture: oracle comparison must catch this.
    for (std::size_t i = 0; i < aq.buffer.signature.size(); ++i) {
      if (aq.buffer.signature[i] == sql::AggFn::Sum && !is_null(part.rows.front()[i])) {
        if (auto* d = std::get_if<double>(&part.rows.front()[i])) *d += 1.0;
        else if (auto* v = std::get_if<std::int64_t>(&part.rows.front()[i])) *v += 1;
        break;
      }
    }
  }

  aq.buffer.add(part, msg.contributors);
  aq.buffer.children_received++;
  if (aq.early_ok && aq.buffer.ready()) complete(msg.uqi);
}

void PeerNode::complete(const Uqi& uqi) {
  ActiveQuery& aq = active_.at(uqi.key);
  aq.buffer.closed = true;
  QueryRecord& record = table_.at(uqi);
  if (record.state() == State::Failed) return;

  query_state::transition(record, State::Completed);

  if (record.is_initiator()) {
    QueryMetrics& qm = metrics_for(uqi);
    qm.completion_time = ctx_.loop->now();
    qm.peers_included = static_cast<int>(aq.buffer.contributors.size());
    on_initiator_complete(uqi, aq.buffer);
    return;
  }

  overlay::OverlayMessage msg;
  msg.body = overlay::ResultReturn{
      uqi, aq.buffer.accumulated,
      std::vector<PeerId>(aq.buffer.contributors.begin(), aq.buffer.contributors.end()), id_};
  msg.src = id_;
  msg.dst = aq.reply_to;
  msg.send_time = ctx_.loop->now();
  ctx_.transport->send(std::move(msg));
  query_state::transition(record, State::SentBack);
}

void PeerNode::fail_query(const Uqi& uqi, const std::string& reason) {
  auto it = active_.find(uqi.key);
  if (it != active_.end()) it->second.buffer.closed = true;
  QueryRecord& record = table_.at(uqi);
  if (record.state() != State::Failed && record.state() != State::SentBack)
    query_state::transition(record, State::Failed);
  fail_reasons_[uqi.key] = reason;

  auto phase = phase_of_.find(uqi.key);
  if (phase != phase_of_.end()) {
    NestedJob& job = jobs_[phase->second.job];
    if (!job.failed) {
      job.failed = true;
      QueryRecord& user = table_.at(job.user_uqi);
      if (user.state() != State::Failed)
        query_state::transition(user, State::Failed);
      fail_reasons_[job.user_uqi.key] =
          std::string(errc_name(Errc::MissingSubqueryResult)) + ": phase " + uqi.hex() + " failed (" +
          reason + ")";
    }
  }
}

void PeerNode::on_initiator_complete(const Uqi& uqi, const merge::MergeBuffer& buffer) {
  auto phase = phase_of_.find(uqi.key);
  if (phase != phase_of_.end()) {
    nested_phase_complete(phase->second, uqi, buffer);
    return;
  }

  auto plan_it = finalize_plans_.find(uqi.key);
  if (plan_it == finalize_plans_.end()) {
    results_[uqi.key] = buffer.accumulated;
    return;
  }
  const sql::QueryPlan& plan = plan_it->second;
  if (plan.kind == sql::PlanKind::Aggregate)
    results_[uqi.key] = merge::reconstruct_aggregates(plan.slots, buffer.accumulated);
  else
    results_[uqi.key] = buffer.accumulated;
}

namespace {

bool value_known_equal(const Value& a, const Value& b) {
  return compare_values(a, CmpOp::Eq, b) == Tri::True;
}

}  // namespace

void PeerNode::nested_phase_complete(const PhaseRef& ref, const Uqi& phase_uqi,
                                     const merge::MergeBuffer& buffer) {
  NestedJob& job = jobs_[ref.job];
  if (job.failed) return;

  if (ref.sub_index >= 0) {
    const sql::SubqueryPlan& sub = job.plan.subplans[static_cast<std::size_t>(ref.sub_index)];
    storage::Recordset result = sub.aggregate
                                    ? merge::reconstruct_aggregates(sub.slots, buffer.accumulated)
                                    : buffer.accumulated;
    job.sub_results[static_cast<std::size_t>(ref.sub_index)] = std::move(result);
    for (const auto& r : job.sub_results)
      if (!r.has_value()) return;
    start_parent_phase(job);
    return;
  }

  finalize_nested(job, buffer.accumulated, buffer);
  (void)phase_uqi;
}

void PeerNode::start_parent_phase(NestedJob& job) {
  job.bound.clear();
  for (std::size_t i = 0; i < job.sub_results.size(); ++i) {
    const storage::Recordset& rs = *job.sub_results[i];
    sql::BoundSubquery bound;
    if (job.plan.subplans[i].aggregate) {
      bound.scalar = true;
      bound.scalar_value = rs.rows.empty() ? Value{} : rs.rows.front().front();
    } else {
      for (const auto& row : rs.rows) {
        const Value& v = row.front();
        if (is_null(v)) continue;
        bool seen = false;
        for (const auto& existing : bound.in_values)
          if (value_known_equal(existing, v)) { seen = true; break; }
        if (!seen) bound.in_values.push_back(v);
      }
    }
    job.bound.push_back(std::move(bound));
  }

  std::string wire;
  sql::ExecutablePlan exec;
  if (job.plan.parent_has_holes) {
    sql::Select bound_select = sql::bind_subqueries(job.plan.parent_template, job.bound);
    wire = sql::render(bound_select);
    exec = sql::compile(std::move(bound_select));
  } else {
    wire = sql::render(job.plan.parent_template);
    exec = sql::compile(sql::clone(job.plan.parent_template));
  }

  Uqi parent_uqi = query_state::new_uqi(wire, id_, submission_counter_++, ctx_.seed);
  QueryRecord record;
  record.uqi = parent_uqi;
  record.value = wire;
  record.arrival_time = ctx_.loop->now();
  record.ttl = job.parent_ttl;
  record.sender_key = kInitiatorSentinel;
  table_.record_if_new(std::move(record));
  metrics_for(parent_uqi).inserted_count++;

  std::size_t job_index = static_cast<std::size_t>(&job - jobs_.data());
  phase_of_.emplace(parent_uqi.key, PhaseRef{job_index, -1});
  start_distributed(parent_uqi, wire, std::move(exec), job.parent_ttl);
}

storage::Recordset PeerNode::refilter_and_project(const NestedJob& job,
                                                  const storage::Recordset& widened) {
  sql::ExprPtr predicate = sql::bind_predicate(*job.plan.bound_predicate_template, job.bound);

  storage::Recordset filtered;
  filtered.columns = widened.columns;
  for (const auto& row : widened.rows) {
    auto lookup = [&](const sql::ColumnRef& ref) -> Value {
      if (!ref.qualifier.empty() && ref.qualifier != job.plan.original.table)
        fail(Errc::UnknownColumn, ref.qualifier + "." + ref.name);
      int idx = widened.column_index(ref.name);
      if (idx < 0) fail(Errc::UnknownColumn, ref.name);
      return row[static_cast<std::size_t>(idx)];
    };
    if (sql::eval_predicate(*predicate, lookup) == Tri::True) filtered.rows.push_back(row);
  }

  if (job.plan.original.star) return filtered;

  storage::Recordset projected;
  std::vector<int> indices;
  for (const auto& item : job.plan.original.projection) {
    const auto& ref = std::get<sql::ColumnRef>(item);
    int idx = filtered.column_index(ref.name);
    if (idx < 0) fail(Errc::UnknownColumn, ref.name);
    indices.push_back(idx);
    projected.columns.push_back(filtered.columns[static_cast<std::size_t>(idx)]);
  }
  for (const auto& row : filtered.rows) {
    storage::Row out;
    for (int idx : indices) out.push_back(row[static_cast<std::size_t>(idx)]);
    projected.rows.push_back(std::move(out));
  }
  return projected;
}

void PeerNode::finalize_nested(NestedJob& job, const storage::Recordset& parent_rows,
                               const merge::MergeBuffer& buffer) {
  storage::Recordset result;
  try {
    if (job.plan.refilter) {
      result = refilter_and_project(job, parent_rows);
    } else if (sql::has_aggregate(job.plan.parent_template)) {
      result = merge::reconstruct_aggregates(job.plan.slots, parent_rows);
    } else {
      result = parent_rows;
    }
  } catch (const Error& e) {
    fail_query(job.user_uqi, e.what());
    return;
  }

  QueryRecord& user = table_.at(job.user_uqi);
  query_state::transition(user, State::LocallyExecuted);
  query_state::transition(user, State::Completed);
  results_[job.user_uqi.key] = std::move(result);

  QueryMetrics& qm = metrics_for(job.user_uqi);
  qm.completion_time = ctx_.loop->now();
  qm.peers_included = static_cast<int>(buffer.contributors.size());
}

QueryStatus PeerNode::fetch_results(const Uqi& uqi) const {
  const QueryRecord& record = table_.at(uqi);
  QueryStatus status;
  status.uqi = uqi;
  status.state = record.state();
  if (auto it = fail_reasons_.find(uqi.key); it != fail_reasons_.end())
    status.failure_reason = it->second;
  if (status.state == State::Completed && record.is_initiator()) {
    if (auto it = results_.find(uqi.key); it != results_.end()) status.result = it->second;
  }
  return status;
}

}  // namespace idss::peer
