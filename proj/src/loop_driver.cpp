#include "sea/loop_driver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "sea/error.hpp"

namespace sea {

using nlohmann::json;

ShotsProfile shots_profile(int shots) {
  if (shots < 1) throw Error(ErrorCode::kInvalidParams, "shots must be at least 1");
  ShotsProfile p;
  if (shots <= 5) {
    p.total_steps = 6000 + (shots - 1) * 500;
  } else {
    p.total_steps = 8000 + (shots - 5) * 800;
  }
  p.steps_per_cycle = 100;
  p.cycles = p.total_steps / p.steps_per_cycle;
  p.noise_scale = 1.0 / shots;
  return p;
}

void RunConfig::validate() const {
  backbone.validate();
  sampler.validate();
  smoothing.validate();
  allocator.validate();
  fsm.validate();
  if (shots < 1) throw Error(ErrorCode::kInvalidParams, "shots must be at least 1");
  if (cycles < 1) throw Error(ErrorCode::kInvalidParams, "cycles must be at least 1");
  if (steps_per_cycle < 1) throw Error(ErrorCode::kInvalidParams, "steps_per_cycle must be at least 1");
  if (refinetune_steps < 0) throw Error(ErrorCode::kInvalidParams, "refinetune_steps must be >= 0");
}

BackboneDesc default_backbone() {
  BackboneDesc b;
  b.num_layers = 2;
  b.hidden_dims = {384, 768};
  b.param_count = 62'000'000;
  return b;
}

RunConfig default_run_config(int shots, std::uint64_t seed) {
  RunConfig c;
  c.backbone = default_backbone();
  c.schema = default_schema();
  c.shots = shots;
  const ShotsProfile profile = shots_profile(shots);
  c.cycles = profile.cycles;
  c.steps_per_cycle = profile.steps_per_cycle;
  c.refinetune_steps = profile.total_steps;
  c.seed = seed;
  return c;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json read_json_file(const std::filesystem::path& path, ErrorCode code) {
  std::ifstream in(path);
  if (!in) throw Error(code, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(code, path.string() + ": " + e.what());
  }
}

}  // namespace

RunConfig run_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig c = default_run_config(1, 1);
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "run config must be a JSON object");
    c.seed = doc.value("seed", c.seed);
    c.shots = doc.value("shots", 1);
    const ShotsProfile profile = shots_profile(c.shots);
    c.cycles = doc.value("cycles", profile.cycles);
    c.steps_per_cycle = doc.value("steps_per_cycle", profile.steps_per_cycle);
    c.refinetune_steps = doc.value("refinetune_steps", profile.total_steps);

    if (doc.contains("schema") && doc.at("schema") != "default") {
      json schema_doc = doc.at("schema");
      if (schema_doc.is_string()) {
        schema_doc = read_json_file(resolve(base_dir, schema_doc.get<std::string>()),
                                    ErrorCode::kInvalidConfig);
      }
      std::tie(c.backbone, c.schema) = parse_schema_json(schema_doc);
    }
    const std::string initial = doc.value("initial_active", std::string("none"));
    if (initial == "none") {
      c.initial_active = InitialActive::kNone;
    } else if (initial == "all") {
      c.initial_active = InitialActive::kAll;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "initial_active must be \"none\" or \"all\"");
    }

    if (doc.contains("oracle")) {
      const json& o = doc.at("oracle");
      const std::string type = o.value("type", std::string("synthetic"));
      if (o.contains("seed")) c.oracle.seed = o.at("seed").get<std::uint64_t>();
      if (type == "synthetic") {
        c.oracle.kind = OracleSource::Kind::kSynthetic;
        c.oracle.synthetic = synthetic_params_from_json(o);
      } else if (type == "spec") {
        c.oracle.kind = OracleSource::Kind::kSpec;
        c.oracle.spec = o.contains("path")
                            ? oracle_spec_from_json(read_json_file(
                                  resolve(base_dir, o.at("path").get<std::string>()),
                                  ErrorCode::kInvalidConfig))
                            : oracle_spec_from_json(o.at("spec"));
      } else if (type == "replay") {
        c.oracle.kind = OracleSource::Kind::kReplay;
        c.oracle.trace_path = resolve(base_dir, o.at("trace").get<std::string>()).string();
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown oracle type '" + type + "'");
      }
    }
    if (doc.contains("sampler")) {
      const json& s = doc.at("sampler");
      c.sampler.audit_batch = s.value("audit_batch", c.sampler.audit_batch);
      c.sampler.active_fraction = s.value("active_fraction", c.sampler.active_fraction);
      c.sampler.epsilon = s.value("epsilon", c.sampler.epsilon);
    }
    if (doc.contains("smoothing")) {
      const json& s = doc.at("smoothing");
      c.smoothing.beta = s.value("beta", c.smoothing.beta);
      c.smoothing.lambda_s = s.value("lambda_s", c.smoothing.lambda_s);
      c.smoothing.window = s.value("window", c.smoothing.window);
    }
    if (doc.contains("allocator")) {
      const json& a = doc.at("allocator");
      c.allocator.p_max = a.value("p_max", c.allocator.p_max);
      c.allocator.mu_eff = a.value("mu_eff", c.allocator.mu_eff);
    }
    if (doc.contains("fsm")) {
      const json& f = doc.at("fsm");
      c.fsm.tau_act = f.value("tau_act", c.fsm.tau_act);
      c.fsm.tau_rank = f.value("tau_rank", c.fsm.tau_rank);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("run config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path, ErrorCode::kInvalidConfig), path.parent_path());
}

json to_json(const RunConfig& c) {
  json oracle;
  switch (c.oracle.kind) {
    case OracleSource::Kind::kSynthetic:
      oracle = to_json(c.oracle.synthetic);
      oracle["type"] = "synthetic";
      break;
    case OracleSource::Kind::kSpec:
      oracle = {{"type", "spec"}, {"spec", to_json(c.oracle.spec)}};
      break;
    case OracleSource::Kind::kReplay:
      oracle = {{"type", "replay"}, {"trace", c.oracle.trace_path}};
      break;
  }
  if (c.oracle.seed) oracle["seed"] = *c.oracle.seed;
  return {{"seed", c.seed},
          {"shots", c.shots},
          {"cycles", c.cycles},
          {"steps_per_cycle", c.steps_per_cycle},
          {"refinetune_steps", c.refinetune_steps},
          {"initial_active", c.initial_active == InitialActive::kAll ? "all" : "none"},
          {"schema", schema_to_json(c.backbone, c.schema)},
          {"oracle", oracle},
          {"sampler",
           {{"audit_batch", c.sampler.audit_batch},
            {"active_fraction", c.sampler.active_fraction},
            {"epsilon", c.sampler.epsilon}}},
          {"smoothing",
           {{"beta", c.smoothing.beta}, {"lambda_s", c.smoothing.lambda_s},
            {"window", c.smoothing.window}}},
          {"allocator", {{"p_max", c.allocator.p_max}, {"mu_eff", c.allocator.mu_eff}}},
          {"fsm", {{"tau_act", c.fsm.tau_act}, {"tau_rank", c.fsm.tau_rank}}}};
}

Environment make_environment(const RunConfig& config) {
  config.validate();
  Environment env;
  env.space = std::make_unique<AuditSpace>(
      build_audit_space(config.backbone, config.schema, config.initial_active));
  const std::uint64_t truth_seed = config.oracle.seed.value_or(config.seed);
  switch (config.oracle.kind) {
    case OracleSource::Kind::kSynthetic: {
      const double noise = config.oracle.synthetic.noise * shots_profile(config.shots).noise_scale;
      env.oracle = std::make_unique<SyntheticOracle>(make_synthetic_spec(
          *env.space, config.oracle.synthetic, noise, config.steps_per_cycle, truth_seed));
      break;
    }
    case OracleSource::Kind::kSpec: {
      OracleSpec spec = config.oracle.spec;
      if (config.oracle.seed) spec.seed = truth_seed;
      env.oracle = std::make_unique<SyntheticOracle>(std::move(spec));
      break;
    }
    case OracleSource::Kind::kReplay:
      env.oracle = std::make_unique<ReplayOracle>(ReplayOracle::load(config.oracle.trace_path));
      break;
  }
  if (env.oracle->size() != env.space->size()) {
    throw Error(ErrorCode::kInvalidConfig, "oracle covers " + std::to_string(env.oracle->size()) +
                                               " units but the audit space has " +
                                               std::to_string(env.space->size()));
  }
  return env;
}

RunState initial_state(const RunConfig& config, const AuditSpace& space) {
  RunState s;
  s.gates = space.initial_gates();
  s.training = TrainingState(space.size());
  s.trackers.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) s.trackers.emplace_back(i, config.smoothing.window);
  s.fsm = FsmState(space.size(), config.fsm);
  return s;
}

double measure_utility(const EvaluationOracle& oracle, const TrainingState& training,
                       const GateVector& gates, std::size_t unit, double cost, double full_score,
                       std::uint64_t call_index) {
  GateVector toggled = gates;
  toggled[unit] = !gates[unit];
  const double toggled_score = oracle.evaluate(training, toggled, call_index);
  const double delta = gates[unit] ? full_score - toggled_score : toggled_score - full_score;
  return delta / cost;
}

std::vector<double> current_scores(const RunState& state, const SmoothingParams& params) {
  std::vector<double> scores(state.trackers.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < state.trackers.size(); ++i) {
    if (state.trackers[i].audited()) scores[i] = state.trackers[i].robust_score(params);
  }
  return scores;
}

GateVector audited_mask(const RunState& state) {
  GateVector mask(state.trackers.size(), false);
  for (std::size_t i = 0; i < state.trackers.size(); ++i) mask[i] = state.trackers[i].audited();
  return mask;
}

namespace {

std::vector<std::size_t> delta_ids(const GateVector& from, const GateVector& to) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] != to[i]) ids.push_back(i);
  }
  return ids;
}

std::vector<double> measure_batch(const LoopContext& ctx, const RunState& state,
                                  const std::vector<std::size_t>& batch, double full_score,
                                  std::uint64_t first_call) {
  std::vector<double> utilities(batch.size(), 0.0);
  auto work = [&](std::size_t slot) {
    const std::size_t id = batch[slot];
    utilities[slot] = measure_utility(ctx.oracle, state.training, state.gates, id, ctx.space[id].cost,
                                      full_score, first_call + slot);
  };
  const std::size_t workers =
      std::min<std::size_t>(ctx.threads > 1 ? static_cast<std::size_t>(ctx.threads) : 1, batch.size());
  if (workers <= 1) {
    for (std::size_t slot = 0; slot < batch.size(); ++slot) work(slot);
    return utilities;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t slot = w; slot < batch.size(); slot += workers) work(slot);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return utilities;
}

}  // namespace

json run_cycle(RunState& state, const LoopContext& ctx, int cycle) {
  const RunConfig& cfg = ctx.config;
  const std::span<const double> costs = ctx.space.costs();

  // Search
  state.training = train_step(std::move(state.training), state.gates, cfg.steps_per_cycle);

  // Audit
  std::vector<int> probes(state.trackers.size());
  for (std::size_t i = 0; i < probes.size(); ++i) probes[i] = state.trackers[i].probe_count();
  Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(cycle));
  const AuditBatch batch = sample_audit_batch(state.gates, probes, cfg.sampler, rng);

  const std::uint64_t full_call = state.next_call;
  const double full_score = ctx.oracle.evaluate(state.training, state.gates, full_call);
  const auto utilities = measure_batch(ctx, state, batch.ids, full_score, full_call + 1);
  state.next_call += 1 + batch.ids.size();
  state.evaluations += static_cast<std::int64_t>(1 + batch.ids.size());

  json records = json::array();
  for (std::size_t slot = 0; slot < batch.ids.size(); ++slot) {
    UtilityTracker& tracker = state.trackers[batch.ids[slot]];
    tracker.record(utilities[slot], cfg.smoothing, cycle);
    records.push_back({{"cycle", cycle},
                       {"unit_id", batch.ids[slot]},
                       {"u_raw", utilities[slot]},
                       {"ema", tracker.ema()},
                       {"score", tracker.robust_score(cfg.smoothing)},
                       {"probe_count", tracker.probe_count()}});
  }

  // Allocate
  const auto scores = current_scores(state, cfg.smoothing);
  const GateVector eligible = audited_mask(state);
  const AllocationProposal proposal = greedy_allocate(scores, costs, eligible, cfg.allocator.p_max);
  const GateVector accepted = apply_hysteresis(state.gates, proposal, scores, costs,
                                               cfg.allocator.p_max, cfg.allocator.mu_eff);
  const BudgetGuard guard{scores, costs, cfg.allocator.p_max};
  const FsmResult fsm = filter_cycle(state.fsm, ctx.space, state.gates, accepted, &guard);

  const double budget_used = total_cost(fsm.gates, costs);
  if (budget_used > cfg.allocator.p_max) {
    throw std::logic_error("committed configuration exceeds the parameter budget");
  }

  json votes = json::array();
  json rank_votes = json::array();
  for (std::size_t i = 0; i < state.fsm.size(); ++i) {
    const UnitVotes& v = state.fsm.votes(i);
    if (v.act_counter > 0) {
      votes.push_back({{"unit", i}, {"counter", v.act_counter}, {"pending", *v.pending_gate}});
    }
    if (v.rank_counter > 0) {
      rank_votes.push_back({{"unit", i}, {"counter", v.rank_counter}, {"pending_size", *v.pending_size}});
    }
  }

  json record = {
      {"type", "cycle"},
      {"cycle", cycle},
      {"search", {{"steps", cfg.steps_per_cycle}, {"trained", active_ids(state.gates)}}},
      {"audit",
       {{"cycle", cycle},
        {"batch", batch.ids},
        {"exploration_slots", batch.exploration_ids},
        {"full_score", full_score},
        {"evaluations", 1 + batch.ids.size()},
        {"records", records}}},
      {"allocation",
       {{"cycle", cycle},
        {"proposed_gates_delta", delta_ids(state.gates, proposal.gates)},
        {"accepted_gates_delta", delta_ids(state.gates, accepted)},
        {"total_cost", proposal.total_cost},
        {"total_score", proposal.total_score}}},
      {"fsm",
       {{"cycle", cycle},
        {"votes", votes},
        {"rank_votes", rank_votes},
        {"commits", fsm.commits},
        {"rejected", fsm.rejected},
        {"T_c", state.fsm.committed_changes()}}},
      {"gates", to_bitstring(fsm.gates)},
      {"budget_used", budget_used}};
  state.gates = fsm.gates;
  return record;
}

json to_json(const RunReport& r) {
  auto optional_array = [](const std::vector<std::optional<double>>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(x ? json(*x) : json(nullptr));
    return out;
  };
  return {{"final_gates", to_bitstring(r.final_gates)},
          {"selected", active_ids(r.final_gates)},
          {"final_value", r.final_value ? json(*r.final_value) : json(nullptr)},
          {"selection_score", r.selection_score},
          {"budget_used", r.budget_used},
          {"p_max", r.p_max},
          {"T_c", r.committed_changes},
          {"T_c_bound", r.tau_act > 0 ? r.cycles / r.tau_act : 0},
          {"cycles", r.cycles},
          {"probe_counts", r.probe_counts},
          {"evaluations", r.evaluations},
          {"regret", optional_array(r.regret)},
          {"value_curve", optional_array(r.value_curve)},
          {"event_log", r.event_log_path}};
}

RunOutput run_full(const RunConfig& config, const RunOptions& options) {
  const Environment env = make_environment(config);
  return run_full(config, *env.space, *env.oracle, options);
}

RunOutput run_full(const RunConfig& config, const AuditSpace& space, const EvaluationOracle& oracle,
                   const RunOptions& options) {
  config.validate();
  if (oracle.size() != space.size()) {
    throw Error(ErrorCode::kInvalidConfig, "oracle and audit space differ in size");
  }
  std::optional<RecordingOracle> recorder;
  if (options.record_trace) recorder.emplace(oracle);
  const EvaluationOracle& active_oracle =
      recorder ? static_cast<const EvaluationOracle&>(*recorder) : oracle;

  RunOutput out;
  RunState state = initial_state(config, space);
  const LoopContext ctx{config, space, active_oracle, options.threads};

  out.events.push_back({{"type", "header"},
                        {"num_units", space.size()},
                        {"cycles", config.cycles},
                        {"steps_per_cycle", config.steps_per_cycle},
                        {"p_max", config.allocator.p_max},
                        {"tau_act", config.fsm.tau_act},
                        {"seed", config.seed},
                        {"initial_gates", to_bitstring(state.gates)},
                        {"costs", std::vector<double>(space.costs().begin(), space.costs().end())}});
  for (int t = 0; t < config.cycles; ++t) out.events.push_back(run_cycle(state, ctx, t));

  const auto scores = current_scores(state, config.smoothing);
  const AllocationProposal final_pick =
      final_resolve(scores, space.costs(), audited_mask(state), config.allocator.p_max);

  // Re-initialise and train only the selected units.
  TrainingState fresh(space.size());
  if (config.refinetune_steps > 0) fresh = train_step(std::move(fresh), final_pick.gates, config.refinetune_steps);

  RunReport& r = out.report;
  r.final_gates = final_pick.gates;
  r.final_value = active_oracle.noise_free_value(fresh, final_pick.gates);
  r.selection_score = final_pick.total_score;
  r.budget_used = final_pick.total_cost;
  r.p_max = config.allocator.p_max;
  r.committed_changes = state.fsm.committed_changes();
  r.cycles = config.cycles;
  r.tau_act = config.fsm.tau_act;
  for (const auto& t : state.trackers) r.probe_counts.push_back(t.probe_count());
  r.evaluations = state.evaluations;

  out.events.push_back({{"type", "final"},
                        {"gates", to_bitstring(final_pick.gates)},
                        {"selected", active_ids(final_pick.gates)},
                        {"selection_score", final_pick.total_score},
                        {"budget_used", final_pick.total_cost},
                        {"refinetune_steps", config.refinetune_steps},
                        {"T_c", r.committed_changes},
                        {"evaluations", r.evaluations}});

  out.diagnostics = compute_diagnostics(out.events, active_oracle.spec());
  for (const auto& c : out.diagnostics.cycles) {
    r.regret.push_back(c.regret);
    r.value_curve.push_back(c.value);
  }
  if (recorder) out.trace = recorder->records();
  return out;
}

GateVector sample_feasible_subset(const AuditSpace& space, double p_max, Rng& rng) {
  const std::size_t n = space.size();
  std::int64_t unit = 0;
  for (const auto& u : space.units()) unit = std::gcd(unit, u.raw_params);
  const auto capacity_raw = static_cast<std::int64_t>(
      std::floor(p_max * static_cast<double>(space.backbone().param_count) + 1e-9));
  const std::int64_t capacity = std::max<std::int64_t>(0, capacity_raw / unit);
  const auto width = static_cast<std::size_t>(capacity + 1);

  // count[i][b]: subsets of units i..n-1 with reduced weight <= b.
  std::vector<std::vector<double>> count(n + 1, std::vector<double>(width, 1.0));
  for (std::size_t i = n; i-- > 0;) {
    const auto w = static_cast<std::size_t>(space[i].raw_params / unit);
    for (std::size_t b = 0; b < width; ++b) {
      count[i][b] = count[i + 1][b] + (w <= b ? count[i + 1][b - w] : 0.0);
    }
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (;;) {
    GateVector gates(n, false);
    std::size_t b = width - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = static_cast<std::size_t>(space[i].raw_params / unit);
      const double with = w <= b ? count[i + 1][b - w] : 0.0;
      if (u01(rng) * count[i][b] < with) {
        gates[i] = true;
        b -= w;
      }
    }
    // Guards against the integer capacity and the float budget disagreeing.
    if (total_cost(gates, space.costs()) <= p_max) return gates;
  }
}

std::vector<double> run_random_baseline(const RunConfig& config, int n_samples) {
  if (n_samples < 1) throw Error(ErrorCode::kInvalidParams, "n_samples must be at least 1");
  const Environment env = make_environment(config);
  if (env.oracle->spec() == nullptr) {
    throw Error(ErrorCode::kInvalidConfig, "the random baseline needs a ground-truth oracle");
  }
  Rng rng = make_rng(config.seed, 0xba5e11eULL);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    const GateVector gates = sample_feasible_subset(*env.space, config.allocator.p_max, rng);
    TrainingState trained(env.space->size());
    if (config.refinetune_steps > 0) trained = train_step(std::move(trained), gates, config.refinetune_steps);
    values.push_back(*env.oracle->noise_free_value(trained, gates));
  }
  return values;
}

}  // namespace sea
