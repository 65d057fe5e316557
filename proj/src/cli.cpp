#include "sea/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "sea/bounds.hpp"
#include "sea/diagnostics.hpp"
#include "sea/error.hpp"
#include "sea/loop_driver.hpp"
#include "sea/stats.hpp"

namespace sea::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Config-stage failures map to exit 2, everything after to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int thread_cap() {
  const char* env = std::getenv("SEA_ALLOC_THREADS");
  if (env == nullptr) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::string_view text(env);
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value < 0) {
    throw ConfigError("SEA_ALLOC_THREADS must be a non-negative integer");
  }
  return value;
}

RunConfig load_config(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  if (!fs::exists(c.config)) throw ConfigError("config file '" + c.config + "' does not exist");
  try {
    RunConfig config = load_run_config(c.config);
    if (c.seed) config.seed = *c.seed;
    return config;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_run_outputs(const fs::path& dir, RunOutput& result) {
  result.report.event_log_path = "events.jsonl";
  write_text(dir / "report.json", to_json(result.report).dump(2) + "\n");
  std::ostringstream events;
  write_event_log(events, result.events);
  write_text(dir / "events.jsonl", events.str());
  std::ostringstream csv;
  csv << std::setprecision(10);
  write_diagnostics_csv(csv, result.diagnostics);
  write_text(dir / "diagnostics.csv", csv.str());
}

void print_summary(std::ostream& out, const RunReport& r) {
  out << "selected units : " << std::count(r.final_gates.begin(), r.final_gates.end(), true) << " of "
      << r.final_gates.size() << "\n"
      << "budget used    : " << r.budget_used << " (limit " << r.p_max << ")\n"
      << "T_c            : " << r.committed_changes << " (bound " << r.cycles / r.tau_act << ")\n"
      << "evaluations    : " << r.evaluations << "\n";
  if (r.final_value) out << "final value    : " << *r.final_value << "\n";
}

Environment environment_or_config_error(const RunConfig& config) {
  try {
    return make_environment(config);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int cmd_run(const Common& c, bool record_trace, std::ostream& out) {
  const RunConfig config = load_config(c);
  const fs::path dir = prepare_out(c);
  const Environment env = environment_or_config_error(config);
  RunOutput result = run_full(config, *env.space, *env.oracle, RunOptions{thread_cap(), record_trace});
  write_run_outputs(dir, result);
  if (record_trace) {
    std::ostringstream trace;
    write_trace(trace, result.trace);
    write_text(dir / "trace.jsonl", trace.str());
  }
  if (!c.quiet) print_summary(out, result.report);
  return kExitOk;
}

int cmd_replay(const Common& c, const std::string& trace_path, std::ostream& out) {
  RunConfig config = load_config(c);
  if (!fs::exists(trace_path)) throw ConfigError("trace file '" + trace_path + "' does not exist");
  config.oracle.kind = OracleSource::Kind::kReplay;
  config.oracle.trace_path = trace_path;
  const fs::path dir = prepare_out(c);
  const Environment env = environment_or_config_error(config);
  RunOutput result = run_full(config, *env.space, *env.oracle, RunOptions{thread_cap(), false});
  write_run_outputs(dir, result);
  if (!c.quiet) print_summary(out, result.report);
  return kExitOk;
}

int cmd_baseline(const Common& c, int samples, std::ostream& out) {
  const RunConfig config = load_config(c);
  const fs::path dir = prepare_out(c);
  if (samples < 1) throw ConfigError("--samples must be at least 1");
  environment_or_config_error(config);
  const std::vector<double> values = run_random_baseline(config, samples);
  const json doc = {{"samples", samples},
                    {"p_max", config.allocator.p_max},
                    {"values", values},
                    {"median", stats::median(values)},
                    {"min", *std::min_element(values.begin(), values.end())},
                    {"max", *std::max_element(values.begin(), values.end())}};
  write_text(dir / "baseline.json", doc.dump(2) + "\n");
  if (!c.quiet) {
    out << "random baseline: " << samples << " samples, median " << doc["median"].get<double>() << "\n";
  }
  return kExitOk;
}

void print_checks(std::ostream& out, const std::vector<BoundCheck>& checks) {
  out << std::left << std::setw(44) << "check" << std::right << std::setw(12) << "measured"
      << std::setw(12) << "bound" << std::setw(8) << "result" << "\n";
  for (const auto& b : checks) {
    out << std::left << std::setw(44) << b.name << std::right << std::fixed << std::setprecision(4)
        << std::setw(12) << b.measured << std::setw(12) << b.bound << std::setw(8)
        << (b.passed ? "PASS" : "FAIL") << "\n";
    out.unsetf(std::ios::floatfield);
  }
}

int cmd_verify_bounds(const Common& c, std::ostream& out) {
  const std::uint64_t seed = c.seed.value_or(7);
  std::vector<BoundCheck> checks;
  for (double beta : {0.5, 0.9}) checks.push_back(check_ema_variance(beta, 1.0, 10000, 200, seed));
  checks.push_back(check_ema_drift(0.9, 0.01, 500));
  for (int tau : {1, 2, 3}) checks.push_back(check_fsm_exhaustive(12, tau));
  checks.push_back(check_fsm_adversarial(90, 3));
  checks.push_back(check_fsm_fuzz(10000, 3, 100, seed));
  const BoundCheck coverage = check_coverage(60, 6, 0.3, 2000, 5, seed);
  BoundCheck rate;
  rate.name = "coverage rate (min probes / T)";
  rate.measured = coverage.measured / 2000.0;
  rate.bound = coverage_lower_bound(60, 6, 0.3);
  rate.lower = true;
  rate.passed = rate.measured >= rate.bound;
  checks.push_back(rate);
  checks.push_back(coverage);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const BoundCheck& b) { return b.passed; });
  if (!c.quiet) print_checks(out, checks);
  if (c.out_dir != ".") {
    json rows = json::array();
    for (const auto& b : checks) {
      rows.push_back({{"check", b.name}, {"measured", b.measured}, {"bound", b.bound}, {"passed", b.passed}});
    }
    write_text(prepare_out(c) / "bounds.json", rows.dump(2) + "\n");
  }
  return ok ? kExitOk : kExitRuntime;
}

int cmd_bench_alloc(const Common& c, int instances, int n_max, std::ostream& out) {
  if (n_max < 1 || static_cast<std::size_t>(n_max) > kBruteForceCap) {
    throw ConfigError("--n-max must be between 1 and 20 (exhaustive enumeration cap)");
  }
  if (instances < 1) throw ConfigError("--instances must be at least 1");
  const AllocBenchResult r = bench_allocator(instances, n_max, c.seed.value_or(11));
  if (!c.quiet) {
    out << "instances " << instances << ", n_max " << n_max << "\n"
        << std::fixed << std::setprecision(4) << "min ratio    " << r.min << "\n"
        << "p10 ratio    " << r.p10 << "\n"
        << "median ratio " << r.median << "\n"
        << "share >= 0.95 " << r.share_above_95 << "\n";
    out.unsetf(std::ios::floatfield);
  }
  return r.min >= 0.5 ? kExitOk : kExitRuntime;
}

int cmd_report(const Common& c, const std::string& events_path, std::ostream& out) {
  if (!fs::exists(events_path)) throw ConfigError("event log '" + events_path + "' does not exist");
  std::optional<Environment> env;
  if (!c.config.empty()) env = environment_or_config_error(load_config(c));
  const fs::path dir = prepare_out(c);
  std::ifstream in(events_path);
  const std::vector<json> events = read_event_log(in);
  const Diagnostics d = compute_diagnostics(events, env ? env->oracle->spec() : nullptr);
  std::ostringstream csv;
  write_diagnostics_csv(csv, d);
  write_text(dir / "diagnostics.csv", csv.str());
  if (!c.quiet) {
    const int min_cov = d.coverage.empty() ? 0 : *std::min_element(d.coverage.begin(), d.coverage.end());
    out << "cycles       : " << d.cycles.size() << "\n"
        << "T_c          : " << d.committed_changes << "\n"
        << "evaluations  : " << d.evaluations << "\n"
        << "min coverage : " << min_cov << "\n";
    if (d.optimum_value) out << "optimum      : " << *d.optimum_value << "\n";
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_config) {
  if (with_config) sub->add_option("--config", c.config, "run config JSON");
  sub->add_option("--out", c.out_dir, "output directory (created if absent)");
  sub->add_option("--seed", c.seed, "override the run seed");
  sub->add_flag("--quiet", c.quiet, "suppress the summary on standard output");
}

}  // namespace

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budgeted adapter search: search, audit, allocate", "sea-alloc"};
  app.require_subcommand(1);

  Common common;
  bool record_trace = false;
  int samples = 20;
  int instances = 500;
  int n_max = 15;
  std::string trace_path;
  std::string events_path;

  auto* run = app.add_subcommand("run", "run the full search-audit-allocate loop");
  add_common(run, common, true);
  run->add_flag("--record-trace", record_trace, "also write every oracle call to trace.jsonl");

  auto* baseline = app.add_subcommand("baseline", "values of random configurations at the same budget");
  add_common(baseline, common, true);
  baseline->add_option("--samples", samples, "number of random configurations");

  auto* verify = app.add_subcommand("verify-bounds", "check estimator, chatter and coverage bounds");
  add_common(verify, common, false);

  auto* bench = app.add_subcommand("bench-alloc", "compare the allocator with exhaustive search");
  add_common(bench, common, false);
  bench->add_option("--instances", instances, "number of random instances");
  bench->add_option("--n-max", n_max, "largest instance size (at most 20)");

  auto* replay = app.add_subcommand("replay", "rerun a config against a recorded trace");
  add_common(replay, common, true);
  replay->add_option("--trace", trace_path, "trace JSONL")->required();

  auto* report = app.add_subcommand("report", "recompute diagnostics from an event log");
  add_common(report, common, true);
  report->add_option("--events", events_path, "events.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "sea-alloc: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(common, record_trace, out);
    if (baseline->parsed()) return cmd_baseline(common, samples, out);
    if (verify->parsed()) return cmd_verify_bounds(common, out);
    if (bench->parsed()) return cmd_bench_alloc(common, instances, n_max, out);
    if (replay->parsed()) return cmd_replay(common, trace_path, out);
    if (report->parsed()) return cmd_report(common, events_path, out);
  } catch (const ConfigError& e) {
    err << "sea-alloc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "sea-alloc: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sea::cli
