#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sea/adapter_space.hpp"
#include "sea/allocator.hpp"
#include "sea/audit_sampler.hpp"
#include "sea/diagnostics.hpp"
#include "sea/fsm_stabilizer.hpp"
#include "sea/oracle.hpp"
#include "sea/utility_tracker.hpp"

namespace sea {

struct OracleSource {
  enum class Kind { kSynthetic, kSpec, kReplay };

  Kind kind = Kind::kSynthetic;
  SyntheticSpecParams synthetic;
  std::optional<std::uint64_t> seed;  // ground-truth seed; defaults to the run seed
  OracleSpec spec;                    // kSpec
  std::string trace_path;             // kReplay
};

// Step budget per shot count: 1 -> 6000, 5 -> 8000, 10 -> 12000 total steps,
// linear in between (and beyond 10), 100 steps per cycle, noise ~ 1/shots.
struct ShotsProfile {
  int total_steps = 6000;
  int cycles = 60;
  int steps_per_cycle = 100;
  double noise_scale = 1.0;
};

ShotsProfile shots_profile(int shots);

struct RunConfig {
  BackboneDesc backbone;
  AuditSchema schema;
  InitialActive initial_active = InitialActive::kNone;
  OracleSource oracle;
  SamplerParams sampler;
  SmoothingParams smoothing;
  AllocatorParams allocator;
  FsmParams fsm;
  int shots = 1;
  int cycles = 60;
  int steps_per_cycle = 100;
  int refinetune_steps = 6000;
  std::uint64_t seed = 1;

  void validate() const;
};

// Two layers (D = 384, 768) of a 62M-parameter backbone with the default schema.
BackboneDesc default_backbone();
RunConfig default_run_config(int shots = 1, std::uint64_t seed = 1);

// Missing keys keep their defaults; cycles, steps_per_cycle and
// refinetune_steps default to the shots profile. Relative paths resolve
// against base_dir.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// Everything a run needs besides its config: the audit space and an oracle.
struct Environment {
  std::unique_ptr<AuditSpace> space;
  std::unique_ptr<EvaluationOracle> oracle;
};

Environment make_environment(const RunConfig& config);

struct RunState {
  GateVector gates;
  TrainingState training;
  std::vector<UtilityTracker> trackers;
  FsmState fsm;
  std::uint64_t next_call = 0;
  std::int64_t evaluations = 0;
};

RunState initial_state(const RunConfig& config, const AuditSpace& space);

struct LoopContext {
  const RunConfig& config;
  const AuditSpace& space;
  const EvaluationOracle& oracle;
  int threads = 0;  // 0 or 1 = serial
};

// Paired on/off measurement for one unit, divided by its cost. An active unit
// is toggled off (score drop); an inactive unit is toggled on (score gain).
double measure_utility(const EvaluationOracle& oracle, const TrainingState& training,
                       const GateVector& gates, std::size_t unit, double cost, double full_score,
                       std::uint64_t call_index);

// Robust scores of audited units; NaN marks never-audited ones.
std::vector<double> current_scores(const RunState& state, const SmoothingParams& params);
GateVector audited_mask(const RunState& state);

// Search, audit, allocate. Returns the cycle's event-log record.
nlohmann::json run_cycle(RunState& state, const LoopContext& ctx, int cycle);

struct RunReport {
  GateVector final_gates;
  std::optional<double> final_value;  // noise-free, after re-finetuning
  double selection_score = 0.0;
  double budget_used = 0.0;
  double p_max = 0.0;
  int committed_changes = 0;  // T_c
  int cycles = 0;
  int tau_act = 0;
  std::vector<int> probe_counts;
  std::int64_t evaluations = 0;
  std::vector<std::optional<double>> regret;
  std::vector<std::optional<double>> value_curve;
  std::string event_log_path;
};

nlohmann::json to_json(const RunReport& report);

struct RunOptions {
  int threads = 0;
  bool record_trace = false;
};

struct RunOutput {
  RunReport report;
  std::vector<nlohmann::json> events;
  Diagnostics diagnostics;
  std::vector<TraceRecord> trace;  // filled when record_trace is set
};

RunOutput run_full(const RunConfig& config, const RunOptions& options = {});
RunOutput run_full(const RunConfig& config, const AuditSpace& space, const EvaluationOracle& oracle,
                   const RunOptions& options = {});

// Uniform draw over all budget-feasible subsets (counting over integer
// parameter counts, reduced by their gcd).
GateVector sample_feasible_subset(const AuditSpace& space, double p_max, Rng& rng);

// Noise-free values of random feasible configurations, each trained for the
// run's re-finetune step count. Needs a ground-truth oracle.
std::vector<double> run_random_baseline(const RunConfig& config, int n_samples);

}  // namespace sea
