#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sea/adapter_space.hpp"
#include "sea/common.hpp"

namespace sea {

// Ground truth for the synthetic evaluator.
//
// Unit i contributes mu_i(s) = mu_inf_i * max(eta, 1 - exp(-s / kappa_i)) after
// s training steps. Within a redundancy group the positive contributions
// combine as (sum mu^(1/gamma))^gamma, which is additive at gamma = 1 and
// submodular below it; negative contributions add. The score is
// clamp(base + sum over groups, 0, 1), plus clamped Gaussian noise when sampled.
struct OracleSpec {
  double base_score = 0.5;
  std::vector<double> asymptotic;      // mu_inf
  std::vector<double> learning_steps;  // kappa: steps to ~63% of mu_inf
  double drift = 0.0;                  // declared max per-audit change of a true utility
  double noise = 0.0;                  // sigma_val
  std::vector<int> groups;             // redundancy group label per unit
  double gamma = 1.0;
  double warm_start = 0.0;  // eta: fraction of mu_inf present before any training
  std::uint64_t seed = 0;

  std::size_t size() const { return asymptotic.size(); }
  void validate() const;
};

nlohmann::json to_json(const OracleSpec& spec);
OracleSpec oracle_spec_from_json(const nlohmann::json& doc);

struct TrainingState {
  std::vector<double> steps;

  TrainingState() = default;
  explicit TrainingState(std::size_t n) : steps(n, 0.0) {}
};

double learned_utility(const OracleSpec& spec, std::size_t unit, double steps);

// Noise-free v(alpha).
double true_value(const OracleSpec& spec, const TrainingState& state, const GateVector& gates);

// v(alpha) plus N(0, noise^2), clamped to [0,1]. The noise stream is seeded by
// (spec.seed, call_index), so results do not depend on call order.
double evaluate(const OracleSpec& spec, const TrainingState& state, const GateVector& gates,
                std::uint64_t call_index);

TrainingState train_step(TrainingState state, const GateVector& gates, int steps);

// v(alpha) - v(alpha without unit), noise-free. The unit must be active.
double true_marginal(const OracleSpec& spec, const TrainingState& state, const GateVector& gates,
                     std::size_t unit);

struct OracleOptimum {
  GateVector gates;
  double value = 0.0;
};

inline constexpr std::size_t kOracleOptimumCap = 20;

// Exhaustive best noise-free value under the budget; N <= 20.
OracleOptimum oracle_optimum(const OracleSpec& spec, const TrainingState& horizon,
                             std::span<const double> costs, double p_max);

// Largest one-cycle change of any learning curve when trained for `steps`.
double implied_drift(const OracleSpec& spec, int steps);

// ---------------------------------------------------------------------------

class EvaluationOracle {
 public:
  virtual ~EvaluationOracle() = default;

  virtual std::size_t size() const = 0;
  // Must be safe to call concurrently.
  virtual double evaluate(const TrainingState& state, const GateVector& gates,
                          std::uint64_t call_index) const = 0;
  // Ground-truth value when the oracle knows it.
  virtual std::optional<double> noise_free_value(const TrainingState&, const GateVector&) const {
    return std::nullopt;
  }
  virtual const OracleSpec* spec() const { return nullptr; }
};

class SyntheticOracle final : public EvaluationOracle {
 public:
  explicit SyntheticOracle(OracleSpec spec);

  std::size_t size() const override { return spec_.size(); }
  double evaluate(const TrainingState& state, const GateVector& gates,
                  std::uint64_t call_index) const override;
  std::optional<double> noise_free_value(const TrainingState& state,
                                         const GateVector& gates) const override;
  const OracleSpec* spec() const override { return &spec_; }

 private:
  OracleSpec spec_;
};

struct TraceRecord {
  std::string gates;  // bitstring, unit 0 first
  double score = 0.0;
  std::uint64_t noise_seed = 0;
};

std::vector<TraceRecord> read_trace(std::istream& in);
void write_trace(std::ostream& out, std::span<const TraceRecord> records);

// Looks scores up from a recorded trace. An exact (gates, noise_seed) match
// wins; otherwise the first record for the gates is used.
class ReplayOracle final : public EvaluationOracle {
 public:
  explicit ReplayOracle(std::span<const TraceRecord> records);
  static ReplayOracle load(const std::string& path);

  std::size_t size() const override { return width_; }
  double evaluate(const TrainingState& state, const GateVector& gates,
                  std::uint64_t call_index) const override;

 private:
  std::size_t width_ = 0;
  std::map<std::pair<std::string, std::uint64_t>, double> exact_;
  std::map<std::string, double> first_;
};

// Forwards to another oracle and keeps every call for trace export.
class RecordingOracle final : public EvaluationOracle {
 public:
  explicit RecordingOracle(const EvaluationOracle& inner) : inner_(inner) {}

  std::size_t size() const override { return inner_.size(); }
  double evaluate(const TrainingState& state, const GateVector& gates,
                  std::uint64_t call_index) const override;
  std::optional<double> noise_free_value(const TrainingState& state,
                                         const GateVector& gates) const override {
    return inner_.noise_free_value(state, gates);
  }
  const OracleSpec* spec() const override { return inner_.spec(); }

  // Sorted by noise_seed.
  std::vector<TraceRecord> records() const;

 private:
  const EvaluationOracle& inner_;
  mutable std::mutex mutex_;
  mutable std::vector<TraceRecord> records_;
};

// ---------------------------------------------------------------------------
// Generator for synthetic ground truth over an audit space.

struct SyntheticSpecParams {
  double base_score = 0.70;
  double utility_scale = 0.03;    // typical asymptotic gain of a good unit
  double harmful_fraction = 0.1;  // share of units that hurt the score
  double gamma = 0.5;             // within-site redundancy
  double noise = 0.01;            // sigma_val before shot scaling
  double warm_start = 0.1;
  double min_learning_steps = 200.0;
  double max_learning_steps = 1500.0;

  void validate() const;
};

nlohmann::json to_json(const SyntheticSpecParams& params);
SyntheticSpecParams synthetic_params_from_json(const nlohmann::json& doc);

// Units sharing an insertion site (layer, slot) form one redundancy group.
// `noise` is the final sigma_val; `steps_per_cycle` sets the declared drift.
OracleSpec make_synthetic_spec(const AuditSpace& space, const SyntheticSpecParams& params,
                               double noise, int steps_per_cycle, std::uint64_t seed);

}  // namespace sea
