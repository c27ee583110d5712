#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <algorithm>

#include <CLI11.hpp>

#include "idss/harness.hpp"

// Exit codes: 0 success, 1 oracle mismatch, 2 SQL parse/classification error,
// 3 bad peer index, 4 unknown UQI, 5 configuration error.
namespace {

using namespace idss;

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kSqlError = 2;
constexpr int kBadPeer = 3;
constexpr int kUnknownUqi = 4;
constexpr int kConfigError = 5;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::SyntaxError:
    case Errc::UnsupportedFeature:
    case Errc::TooDeepNesting:
    case Errc::MixedAggregateNesting:
    case Errc::HeterogeneousSubqueries:
    case Errc::CorrelatedSubquery:
    case Errc::UnknownTable:
    case Errc::UnknownColumn:
    case Errc::InvalidTtl:
      return kSqlError;
    case Errc::UnknownUqi:
      return kUnknownUqi;
    case Errc::ConfigError:
      return kConfigError;
    default:
      return kConfigError;
  }
}

struct CommonOpts {
  std::string config_path;
  int peers = 8;
  int fanout = 3;
  std::int64_t ttl = 64000;
  std::uint64_t seed = 1;
  double loss = 0.0;
  std::string strategy = "intermediate";
  int initiator = 0;
  int rows = 64;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Scenario JSON; overrides the synthetic baseline");
  cmd->add_option("--peers", o.peers, "Overlay size");
  cmd->add_option("--fanout", o.fanout, "Broadcast fanout k");
  cmd->add_option("--ttl", o.ttl, "Query TTL in virtual ms");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--loss", o.loss, "Message loss probability");
  cmd->add_option("--strategy", o.strategy, "intermediate | initiator");
  cmd->add_option("--initiator", o.initiator, "Submitting peer index");
  cmd->add_option("--rows", o.rows, "Synthetic rows per table (baseline only)");
}

harness::ScenarioConfig build_config(const CommonOpts& o, CLI::App* cmd) {
  harness::ScenarioConfig cfg;
  if (!o.config_path.empty()) {
    cfg = harness::load_scenario_json(o.config_path);
    if (cmd->count("--peers")) cfg.peers = o.peers;
    if (cmd->count("--seed")) cfg.seed = o.seed;
  } else {
    cfg = harness::make_baseline(o.peers, o.seed, o.rows);
  }
  if (cmd->count("--fanout")) cfg.fanout = o.fanout;
  if (cmd->count("--loss")) cfg.loss = o.loss;
  if (cmd->count("--strategy")) cfg.strategy = harness::strategy_from_name(o.strategy);
  return cfg;
}

int check_initiator(const harness::ScenarioConfig& cfg, int initiator) {
  if (initiator < 0 || initiator >= cfg.peers) {
    std::cerr << "error: peer index " << initiator << " out of range [0, " << cfg.peers << ")\n";
    return kBadPeer;
  }
  return kOk;
}

void print_outcome(const harness::QueryOutcome& o) {
  std::cout << "uqi: " << o.uqi.hex() << '\n'
            << "state: " << query_state::state_name(o.state) << '\n';
  if (!o.failure_reason.empty()) std::cout << "reason: " << o.failure_reason << '\n';
  std::cout << "peers_included: " << o.metrics.peers_included << '\n'
            << "duplicates_suppressed: " << o.metrics.duplicates_suppressed << '\n'
            << "late_or_lost: " << o.metrics.late_or_lost << '\n'
            << "completion_time: " << o.metrics.completion_time << '\n'
            << "oracle_match: " << (o.oracle_match ? "yes" : "no") << '\n';
  if (o.result) std::cout << "result:\n" << o.result->to_csv();
}

int cmd_init_schema(const std::string& path) {
  auto schemas = harness::load_schema_json(path);
  for (const auto& schema : schemas) {
    std::cout << schema.name << " (" << schema.columns.size() << " columns)\n";
    for (const auto& col : schema.columns)
      std::cout << "  " << col.name << ' ' << column_type_name(col.type)
                << (col.nullable ? "" : " not null") << '\n';
  }
  return kOk;
}

int cmd_ingest(const std::string& schema_path, const std::string& table,
               const std::string& csv_path) {
  auto schemas = harness::load_schema_json(schema_path);
  if (std::none_of(schemas.begin(), schemas.end(),
                   [&](const auto& s) { return s.name == table; }))
    fail(Errc::ConfigError, "schema has no table named " + table);
  storage::Catalog catalog(schemas);
  std::ifstream in(csv_path);
  if (!in) fail(Errc::ConfigError, "cannot open " + csv_path);
  std::size_t n = catalog.ingest_csv(table, in);
  std::cout << "inserted " << n << " rows into " << table << '\n';
  return kOk;
}

int cmd_submit(const CommonOpts& o, CLI::App* cmd, const std::string& sql) {
  harness::ScenarioConfig cfg = build_config(o, cmd);
  if (int rc = check_initiator(cfg, o.initiator)) return rc;
  cfg.workload = {{0, o.initiator, sql, o.ttl}};
  harness::RunReport rep = harness::run_scenario(cfg);
  const auto& out = rep.outcomes[0];
  if (out.state == query_state::State::Failed && !out.failure_reason.empty() &&
      out.uqi.key.is_zero()) {
    std::cerr << "error: " << out.failure_reason << '\n';
    return kSqlError;
  }
  print_outcome(out);
  return out.oracle_match ? kOk : kMismatch;
}

// Deterministic replay: reruns the same seeded scenario, then reports the
// requested UQI's record on the initiator.
int cmd_fetch(const CommonOpts& o, CLI::App* cmd, const std::string& sql,
              const std::string& uqi_hex) {
  harness::ScenarioConfig cfg = build_config(o, cmd);
  if (int rc = check_initiator(cfg, o.initiator)) return rc;
  if (cfg.workload.empty()) {
    if (sql.empty()) fail(Errc::ConfigError, "fetch needs --sql or a config with a workload");
    cfg.workload = {{0, o.initiator, sql, o.ttl}};
  }
  harness::Simulation sim(cfg);
  for (const auto& item : cfg.workload)
    sim.loop().at(item.time, [&sim, item] { sim.submit(item.initiator, item.sql, item.ttl_ms); });
  sim.run();
  query_state::Uqi uqi{Key128::from_hex(uqi_hex)};
  peer::QueryStatus st = sim.node(o.initiator).fetch_results(uqi);  // throws UnknownUqi
  std::cout << "uqi: " << st.uqi.hex() << '\n'
            << "state: " << query_state::state_name(st.state) << '\n';
  if (!st.failure_reason.empty()) std::cout << "reason: " << st.failure_reason << '\n';
  if (st.result) std::cout << "result:\n" << st.result->to_csv();
  return kOk;
}

int cmd_scenario(const std::string& config_path, const std::string& metrics_path) {
  harness::ScenarioConfig cfg = harness::load_scenario_json(config_path);
  harness::RunReport rep = harness::run_scenario(cfg);
  std::cout << rep.to_text();
  if (!metrics_path.empty()) {
    std::ofstream out(metrics_path);
    if (!out) fail(Errc::ConfigError, "cannot write " + metrics_path);
    out << rep.metrics_csv();
  }
  return rep.all_match() ? kOk : kMismatch;
}

int cmd_sweep(const CommonOpts& o, CLI::App* cmd, const std::string& sql,
              std::vector<std::int64_t> ttls) {
  harness::ScenarioConfig cfg = build_config(o, cmd);
  if (int rc = check_initiator(cfg, o.initiator)) return rc;
  if (cfg.workload.empty()) {
    if (sql.empty()) fail(Errc::ConfigError, "sweep needs --sql or a config with a workload");
    cfg.workload = {{0, o.initiator, sql, o.ttl}};
  }
  std::cout << "ttl,mean_peers_included,mean_completion_time\n";
  for (const auto& pt : harness::sweep_ttl(cfg, ttls))
    std::cout << pt.ttl_ms << ',' << pt.mean_peers_included << ',' << pt.mean_completion_time
              << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"idss: distributed SQL over a one-hop peer overlay (simulated in-process)"};
  app.require_subcommand(1);

  std::string schema_path, csv_path, table, sql, uqi_hex, config_path, metrics_path;
  std::vector<std::int64_t> ttls;
  CommonOpts opts;

  auto* init = app.add_subcommand("init-schema", "Validate and describe a schema JSON");
  init->add_option("--schema", schema_path, "Schema JSON path")->required();

  auto* ingest = app.add_subcommand("ingest", "Validate a CSV against the schema");
  ingest->add_option("--schema", schema_path, "Schema JSON path")->required();
  ingest->add_option("--table", table, "Target table")->required();
  ingest->add_option("--csv", csv_path, "CSV path")->required();

  auto* submit = app.add_subcommand("submit", "Run one query over a simulated overlay");
  submit->add_option("--sql", sql, "Query text")->required();
  add_common(submit, opts);

  auto* fetch = app.add_subcommand("fetch", "Replay a seeded run and fetch one UQI");
  fetch->add_option("--uqi", uqi_hex, "32-hex-digit query identifier")->required();
  fetch->add_option("--sql", sql, "Query text (when no config workload)");
  add_common(fetch, opts);

  auto* scenario = app.add_subcommand("scenario", "Run a scenario JSON and report per-query outcomes");
  scenario->add_option("--config", config_path, "Scenario JSON path")->required();
  scenario->add_option("--metrics-csv", metrics_path, "Write per-query metrics CSV here");

  auto* sweep = app.add_subcommand("sweep", "Rerun one workload across a TTL range");
  sweep->add_option("--ttls", ttls, "TTL values in virtual ms")->required();
  sweep->add_option("--sql", sql, "Query text (when no config workload)");
  add_common(sweep, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) return cmd_init_schema(schema_path);
    if (ingest->parsed()) return cmd_ingest(schema_path, table, csv_path);
    if (submit->parsed()) return cmd_submit(opts, submit, sql);
    if (fetch->parsed()) return cmd_fetch(opts, fetch, sql, uqi_hex);
    if (scenario->parsed()) return cmd_scenario(config_path, metrics_path);
    if (sweep->parsed()) return cmd_sweep(opts, sweep, sql, ttls);
  } catch (const idss::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
