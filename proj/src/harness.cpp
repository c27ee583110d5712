#include "idss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace idss::harness {

namespace {

using nlohmann::json;
using overlay::OverlayMessage;
using storage::Recordset;
using storage::Row;

Value json_to_value(const json& j) {
  if (j.is_null()) return {};
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  fail(Errc::ConfigError, "unsupported JSON cell: " + j.dump());
}

storage::TableSchema schema_from_json(const json& jt) {
  storage::TableSchema schema;
  schema.name = jt.at("name").get<std::string>();
  for (const auto& jc : jt.at("columns")) {
    storage::Column col;
    col.name = jc.at("name").get<std::string>();
    col.type = column_type_from_name(jc.at("type").get<std::string>());
    col.nullable = jc.value("nullable", true);
    schema.columns.push_back(std::move(col));
  }
  return schema;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ConfigError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, path + ": " + e.what());
  }
  return j;
}

bool value_eq(const Value& a, const Value& b, double tol) {
  if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
  bool a_num = !std::holds_alternative<std::string>(a);
  bool b_num = !std::holds_alternative<std::string>(b);
  if (a_num != b_num) return false;
  if (!a_num) return std::get<std::string>(a) == std::get<std::string>(b);
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
    return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
  auto d = [](const Value& v) {
    return std::holds_alternative<double>(v) ? std::get<double>(v)
                                             : static_cast<double>(std::get<std::int64_t>(v));
  };
  double x = d(a), y = d(b);
  return std::fabs(x - y) <= tol * std::max({1.0, std::fabs(x), std::fabs(y)});
}

bool row_eq(const Row& a, const Row& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!value_eq(a[i], b[i], tol)) return false;
  return true;
}

// Total order used only to canonicalize row order before comparison.
bool row_less(const Row& a, const Row& b) {
  auto rank = [](const Value& v) { return v.index(); };
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (rank(a[i]) != rank(b[i])) return rank(a[i]) < rank(b[i]);
    if (std::holds_alternative<std::int64_t>(a[i])) {
      auto x = std::get<std::int64_t>(a[i]), y = std::get<std::int64_t>(b[i]);
      if (x != y) return x < y;
    } else if (std::holds_alternative<double>(a[i])) {
      double x = std::get<double>(a[i]), y = std::get<double>(b[i]);
      if (x != y) return x < y;
    } else if (std::holds_alternative<std::string>(a[i])) {
      const auto &x = std::get<std::string>(a[i]), &y = std::get<std::string>(b[i]);
      if (x != y) return x < y;
    }
  }
  return a.size() < b.size();
}

}  // namespace

std::vector<storage::TableSchema> load_schema_json(const std::string& path) {
  json j = read_json_file(path);
  std::vector<storage::TableSchema> schemas;
  try {
    for (const auto& jt : j.at("tables")) schemas.push_back(schema_from_json(jt));
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, path + ": " + e.what());
  }
  return schemas;
}

ScenarioConfig load_scenario_json(const std::string& path) {
  json j = read_json_file(path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  ScenarioConfig cfg;
  try {
    cfg.peers = j.value("peers", cfg.peers);
    cfg.fanout = j.value("fanout", cfg.fanout);
    if (j.contains("decay")) {
      cfg.decay.num = j["decay"].value("num", cfg.decay.num);
      cfg.decay.den = j["decay"].value("den", cfg.decay.den);
    }
    if (j.contains("latency")) {
      cfg.latency.min_ms = j["latency"].value("min", cfg.latency.min_ms);
      cfg.latency.max_ms = j["latency"].value("max", cfg.latency.max_ms);
    }
    cfg.loss = j.value("loss", cfg.loss);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.horizon = j.value("horizon", cfg.horizon);
    if (j.contains("strategy")) cfg.strategy = strategy_from_name(j["strategy"].get<std::string>());
    if (j.contains("placement")) {
      std::string p = j["placement"].get<std::string>();
      if (p == "round_robin")
        cfg.placement = Placement::RoundRobin;
      else if (p == "block")
        cfg.placement = Placement::Block;
      else
        fail(Errc::ConfigError, "unknown placement: " + p);
    }

    if (j.contains("schema_file"))
      cfg.schemas = load_schema_json((base / j["schema_file"].get<std::string>()).string());
    else
      for (const auto& jt : j.at("tables")) cfg.schemas.push_back(schema_from_json(jt));

    if (j.contains("data")) {
      for (const auto& [table, jd] : j["data"].items()) {
        auto schema_it = std::find_if(cfg.schemas.begin(), cfg.schemas.end(),
                                      [&](const auto& s) { return s.name == table; });
        if (schema_it == cfg.schemas.end()) fail(Errc::ConfigError, "data for unknown table " + table);
        std::vector<Row>& rows = cfg.data[table];
        if (jd.is_object() && jd.contains("csv")) {
          std::ifstream in(base / jd["csv"].get<std::string>());
          if (!in) fail(Errc::ConfigError, "cannot open CSV for " + table);
          rows = storage::parse_csv(*schema_it, in);
        } else {
          for (const auto& jr : jd) {
            Row row;
            for (const auto& jc : jr) row.push_back(json_to_value(jc));
            rows.push_back(std::move(row));
          }
        }
      }
    }

    for (int p : j.value("exec_fault_peers", std::vector<int>{})) cfg.exec_fault_peers.push_back(p);
    cfg.mutate_merge_peer = j.value("mutate_merge_peer", -1);
    if (j.contains("churn"))
      for (const auto& jc : j["churn"])
        cfg.churn.push_back({jc.at("time").get<std::int64_t>(), jc.at("peer").get<int>()});
    if (j.contains("workload"))
      for (const auto& jw : j["workload"])
        cfg.workload.push_back({jw.value("time", std::int64_t{0}), jw.value("initiator", 0),
                                jw.at("sql").get<std::string>(),
                                jw.at("ttl").get<std::int64_t>()});
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, path + ": " + e.what());
  }
  return cfg;
}

peer::Strategy strategy_from_name(const std::string& name) {
  if (name == "intermediate") return peer::Strategy::IntermediateCollector;
  if (name == "initiator") return peer::Strategy::InitiatorCollector;
  fail(Errc::ConfigError, "unknown strategy: " + name);
}

ScenarioConfig make_baseline(int peers, std::uint64_t seed, int rows_per_table) {
  ScenarioConfig cfg;
  cfg.peers = peers;
  cfg.seed = seed;
  cfg.schemas = {
      {"tb_cpu_dynamic",
       {{"node", ColumnType::Text, false},
        {"load", ColumnType::Real, true},
        {"freq", ColumnType::Integer, true},
        {"ts", ColumnType::Timestamp, false}}},
      {"tb_node_static",
       {{"node", ColumnType::Text, false},
        {"cores", ColumnType::Integer, false},
        {"region", ColumnType::Text, true}}},
  };

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> load_dist(0.0, 100.0);
  std::uniform_int_distribution<std::int64_t> freq_dist(800, 3600);
  std::uniform_int_distribution<int> pct(0, 99);
  const char* regions[] = {"eu", "us", "apac"};
  const std::int64_t cores_opts[] = {2, 4, 8, 16, 32};

  auto& dyn = cfg.data["tb_cpu_dynamic"];
  for (int i = 0; i < rows_per_table; ++i) {
    Row row;
    row.push_back("node" + std::to_string(i % 16));
    row.push_back(pct(rng) < 10 ? Value{} : Value{load_dist(rng)});
    row.push_back(pct(rng) < 10 ? Value{} : Value{freq_dist(rng)});
    row.push_back(std::int64_t{1'700'000'000'000} + 1000 * i);
    dyn.push_back(std::move(row));
  }
  auto& stat = cfg.data["tb_node_static"];
  for (int i = 0; i < rows_per_table; ++i) {
    Row row;
    row.push_back("node" + std::to_string(i % 16));
    row.push_back(cores_opts[static_cast<std::size_t>(pct(rng)) % 5]);
    row.push_back(pct(rng) < 15 ? Value{} : Value{std::string(regions[pct(rng) % 3])});
    stat.push_back(std::move(row));
  }
  return cfg;
}

bool rows_equal(const Recordset& a, const Recordset& b, double tol) {
  if (a.columns != b.columns) return false;
  if (a.rows.size() != b.rows.size()) return false;
  auto sa = a.rows, sb = b.rows;
  std::sort(sa.begin(), sa.end(), row_less);
  std::sort(sb.begin(), sb.end(), row_less);
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (!row_eq(sa[i], sb[i], tol)) return false;
  return true;
}

bool rows_subset(const Recordset& sub, const Recordset& super, double tol) {
  if (sub.columns != super.columns) return false;
  std::vector<bool> used(super.rows.size(), false);
  for (const Row& row : sub.rows) {
    bool found = false;
    for (std::size_t i = 0; i < super.rows.size(); ++i) {
      if (used[i] || !row_eq(row, super.rows[i], tol)) continue;
      used[i] = true;
      found = true;
      break;
    }
    if (!found) return false;
  }
  return true;
}

Simulation::Simulation(const ScenarioConfig& config) : config_(config) {
  if (config_.peers < 1) fail(Errc::ConfigError, "need at least one peer");
  transport_ = std::make_unique<overlay::Transport>(loop_, config_.latency, config_.loss,
                                                    config_.seed, log_);

  std::vector<query_state::PeerId> ids;
  for (int i = 0; i < config_.peers; ++i) {
    Key128 id = hash128("peer/" + std::to_string(config_.seed) + "/" + std::to_string(i));
    if (id.is_zero()) id.lo = 1;  // keep clear of the initiator sentinel
    ids.push_back(id);
    ring_.join(id);
  }

  alive_.assign(static_cast<std::size_t>(config_.peers), true);
  for (int i = 0; i < config_.peers; ++i) {
    storage::Catalog catalog(config_.schemas);
    for (const auto& [table, rows] : config_.data) {
      std::vector<Row> mine;
      if (config_.placement == Placement::RoundRobin) {
        for (std::size_t r = i; r < rows.size(); r += static_cast<std::size_t>(config_.peers))
          mine.push_back(rows[r]);
      } else {
        std::size_t chunk = (rows.size() + static_cast<std::size_t>(config_.peers) - 1) /
                            static_cast<std::size_t>(config_.peers);
        std::size_t lo = static_cast<std::size_t>(i) * chunk;
        for (std::size_t r = lo; r < std::min(rows.size(), lo + chunk); ++r)
          mine.push_back(rows[r]);
      }
      if (!mine.empty()) catalog.insert_rows(table, mine);
    }

    peer::PeerConfig pc;
    pc.fanout = config_.fanout;
    pc.decay = config_.decay;
    pc.strategy = config_.strategy;
    pc.fail_local_exec = std::find(config_.exec_fault_peers.begin(),
                                   config_.exec_fault_peers.end(),
                                   i) != config_.exec_fault_peers.end();
    pc.mutate_merge = config_.mutate_merge_peer == i;

    peer::PeerContext ctx{&loop_, transport_.get(), &ring_, &metrics_, config_.seed};
    nodes_.push_back(std::make_unique<peer::PeerNode>(ids[static_cast<std::size_t>(i)],
                                                      std::move(catalog), pc, ctx));
    index_of_[ids[static_cast<std::size_t>(i)]] = i;
  }

  transport_->set_sink([this](const OverlayMessage& msg) {
    auto it = index_of_.find(msg.dst);
    if (it == index_of_.end()) return;
    if (!alive_[static_cast<std::size_t>(it->second)]) return;
    nodes_[static_cast<std::size_t>(it->second)]->deliver(msg);
  });

  for (const ChurnEvent& ev : config_.churn)
    loop_.at(ev.time, [this, p = ev.peer] { fail_stop(p); });
}

peer::PeerNode& Simulation::node(int index) {
  if (index < 0 || index >= node_count()) fail(Errc::ConfigError, "peer index out of range");
  return *nodes_[static_cast<std::size_t>(index)];
}

void Simulation::fail_stop(int index) {
  if (index < 0 || index >= node_count()) fail(Errc::ConfigError, "peer index out of range");
  alive_[static_cast<std::size_t>(index)] = false;
}

Uqi Simulation::submit(int initiator, const std::string& sql, std::int64_t ttl_ms) {
  return node(initiator).submit_query(sql, ttl_ms);
}

bool Simulation::run() { return loop_.run(config_.horizon); }

storage::Catalog Simulation::union_catalog() const {
  storage::Catalog catalog(config_.schemas);
  for (const auto& [table, rows] : config_.data)
    if (!rows.empty()) catalog.insert_rows(table, rows);
  return catalog;
}

bool RunReport::all_match() const {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const QueryOutcome& o) { return o.oracle_match; });
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  for (const auto& o : outcomes) {
    out << "uqi=" << o.uqi.hex() << " state=" << query_state::state_name(o.state)
        << " match=" << (o.oracle_match ? "yes" : "no")
        << " peers=" << o.metrics.peers_included << " dup=" << o.metrics.duplicates_suppressed
        << " late=" << o.metrics.late_or_lost << " done_at=" << o.metrics.completion_time
        << " msgs=" << o.metrics.messages_total;
    if (!o.failure_reason.empty()) out << " reason=\"" << o.failure_reason << '"';
    out << " sql=" << o.sql << '\n';
  }
  out << "log_digest=" << log_digest.hex() << '\n';
  return out.str();
}

std::string RunReport::metrics_csv() const {
  std::ostringstream out;
  out << "uqi,state,oracle_match,peers_included,duplicates_suppressed,late_or_lost,"
         "completion_time,messages_total,inserted_count,initiator_inbound_results\n";
  for (const auto& o : outcomes) {
    out << o.uqi.hex() << ',' << query_state::state_name(o.state) << ','
        << (o.oracle_match ? 1 : 0) << ',' << o.metrics.peers_included << ','
        << o.metrics.duplicates_suppressed << ',' << o.metrics.late_or_lost << ','
        << o.metrics.completion_time << ',' << o.metrics.messages_total << ','
        << o.metrics.inserted_count << ',' << o.metrics.initiator_inbound_results << '\n';
  }
  return out.str();
}

RunReport run_scenario(const ScenarioConfig& config) {
  Simulation sim(config);
  std::vector<std::optional<Uqi>> uqis(config.workload.size());
  std::vector<std::string> errors(config.workload.size());

  for (std::size_t i = 0; i < config.workload.size(); ++i) {
    const WorkloadItem& item = config.workload[i];
    sim.loop().at(item.time, [&sim, &uqis, &errors, item, i] {
      try {
        uqis[i] = sim.node(item.initiator).submit_query(item.sql, item.ttl_ms);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
  }

  RunReport report;
  report.quiescent = sim.run();
  report.log_digest = sim.log().digest();

  storage::Catalog truth = sim.union_catalog();
  for (std::size_t i = 0; i < config.workload.size(); ++i) {
    QueryOutcome o;
    o.sql = config.workload[i].sql;
    try {
      o.expected = oracle(o.sql, truth);
    } catch (const Error&) {
      // invalid workload items carry no ground truth
    }
    if (!uqis[i]) {
      o.state = query_state::State::Failed;
      o.failure_reason = errors[i];
    } else {
      o.uqi = *uqis[i];
      peer::QueryStatus st = sim.node(config.workload[i].initiator).fetch_results(o.uqi);
      o.state = st.state;
      o.result = st.result;
      o.failure_reason = st.failure_reason;
      o.metrics = sim.metrics().for_query(o.uqi.key);
      o.oracle_match = o.result.has_value() && rows_equal(*o.result, o.expected);
    }
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

std::vector<SweepPoint> sweep_ttl(ScenarioConfig base, const std::vector<std::int64_t>& ttls) {
  std::vector<SweepPoint> points;
  for (std::int64_t ttl : ttls) {
    for (auto& item : base.workload) item.ttl_ms = ttl;
    RunReport report = run_scenario(base);
    SweepPoint pt{ttl, 0, 0};
    int done = 0;
    for (const auto& o : report.outcomes) {
      pt.mean_peers_included += o.metrics.peers_included;
      if (o.metrics.completion_time >= 0) {
        pt.mean_completion_time += static_cast<double>(o.metrics.completion_time);
        ++done;
      }
    }
    if (!report.outcomes.empty())
      pt.mean_peers_included /= static_cast<double>(report.outcomes.size());
    if (done) pt.mean_completion_time /= done;
    points.push_back(pt);
  }
  return points;
}

}  // namespace idss::harness
