#include "sea/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "sea/error.hpp"

namespace sea {

void OracleSpec::validate() const {
  const std::size_t n = asymptotic.size();
  if (n == 0) throw Error(ErrorCode::kInvalidParams, "oracle spec has no units");
  if (learning_steps.size() != n || groups.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "oracle spec vectors differ in length");
  }
  if (!(base_score >= 0.0 && base_score <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "base_score must lie in [0,1]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(asymptotic[i])) throw Error(ErrorCode::kInvalidParams, "non-finite utility");
    if (!(learning_steps[i] > 0.0)) throw Error(ErrorCode::kInvalidParams, "kappa must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::kInvalidParams, "gamma must lie in (0,1]");
  if (!(drift >= 0.0) || !(noise >= 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "drift and noise must be non-negative");
  }
  if (!(warm_start >= 0.0 && warm_start <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "warm_start must lie in [0,1]");
  }
}

nlohmann::json to_json(const OracleSpec& spec) {
  return {{"base_score", spec.base_score}, {"asymptotic", spec.asymptotic},
          {"learning_steps", spec.learning_steps}, {"drift", spec.drift},
          {"noise", spec.noise}, {"groups", spec.groups}, {"gamma", spec.gamma},
          {"warm_start", spec.warm_start}, {"seed", spec.seed}};
}

OracleSpec oracle_spec_from_json(const nlohmann::json& doc) {
  try {
    OracleSpec spec;
    spec.base_score = doc.at("base_score").get<double>();
    spec.asymptotic = doc.at("asymptotic").get<std::vector<double>>();
    spec.learning_steps = doc.at("learning_steps").get<std::vector<double>>();
    spec.drift = doc.value("drift", 0.0);
    spec.noise = doc.value("noise", 0.0);
    if (doc.contains("groups")) {
      spec.groups = doc.at("groups").get<std::vector<int>>();
    } else {
      spec.groups.resize(spec.asymptotic.size());
      for (std::size_t i = 0; i < spec.groups.size(); ++i) spec.groups[i] = static_cast<int>(i);
    }
    spec.gamma = doc.value("gamma", 1.0);
    spec.warm_start = doc.value("warm_start", 0.0);
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("oracle spec: ") + e.what());
  }
}

double learned_utility(const OracleSpec& spec, std::size_t unit, double steps) {
  const double progress = 1.0 - std::exp(-steps / spec.learning_steps[unit]);
  return spec.asymptotic[unit] * std::max(spec.warm_start, progress);
}

double true_value(const OracleSpec& spec, const TrainingState& state, const GateVector& gates) {
  const std::size_t n = spec.size();
  if (gates.size() != n || state.steps.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "gates or training state do not match the oracle");
  }
  // Group labels are arbitrary integers; accumulate in first-seen order.
  std::vector<double> pooled;
  std::unordered_map<int, std::size_t> slot;
  double harmful = 0.0;
  const double inv_gamma = 1.0 / spec.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    if (!gates[i]) continue;
    const double mu = learned_utility(spec, i, state.steps[i]);
    if (mu < 0.0) {
      harmful += mu;
      continue;
    }
    auto [it, inserted] = slot.try_emplace(spec.groups[i], pooled.size());
    if (inserted) pooled.push_back(0.0);
    pooled[it->second] += std::pow(mu, inv_gamma);
  }
  double value = spec.base_score + harmful;
  for (double p : pooled) value += std::pow(p, spec.gamma);
  return std::clamp(value, 0.0, 1.0);
}

double evaluate(const OracleSpec& spec, const TrainingState& state, const GateVector& gates,
                std::uint64_t call_index) {
  const double value = true_value(spec, state, gates);
  if (spec.noise == 0.0) return value;
  Rng rng = make_rng(spec.seed, call_index);
  std::normal_distribution<double> noise(0.0, spec.noise);
  return std::clamp(value + noise(rng), 0.0, 1.0);
}

TrainingState train_step(TrainingState state, const GateVector& gates, int steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidParams, "training needs at least one step");
  if (gates.size() != state.steps.size()) {
    throw Error(ErrorCode::kLengthMismatch, "gates do not match the training state");
  }
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i]) state.steps[i] += steps;
  }
  return state;
}

double true_marginal(const OracleSpec& spec, const TrainingState& state, const GateVector& gates,
                     std::size_t unit) {
  if (unit >= gates.size()) throw Error(ErrorCode::kLengthMismatch, "unit id out of range");
  if (!gates[unit]) {
    throw Error(ErrorCode::kInactiveUnit, "unit " + std::to_string(unit) + " is not active");
  }
  GateVector without = gates;
  without[unit] = false;
  return true_value(spec, state, gates) - true_value(spec, state, without);
}

OracleOptimum oracle_optimum(const OracleSpec& spec, const TrainingState& horizon,
                             std::span<const double> costs, double p_max) {
  const std::size_t n = spec.size();
  if (n > kOracleOptimumCap) throw Error(ErrorCode::kTooLarge, "oracle optimum is capped at 20 units");
  if (costs.size() != n) throw Error(ErrorCode::kLengthMismatch, "costs do not match the oracle");

  GateVector gates(n, false);
  OracleOptimum best{gates, true_value(spec, horizon, gates)};
  double best_cost = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    for (std::size_t i = 0; i < n; ++i) gates[i] = (mask >> i) & 1U;
    const double cost = total_cost(gates, costs);
    if (cost > p_max) continue;
    const double value = true_value(spec, horizon, gates);
    if (value > best.value || (value == best.value && cost < best_cost)) {
      best.value = value;
      best.gates = gates;
      best_cost = cost;
    }
  }
  return best;
}

double implied_drift(const OracleSpec& spec, int steps) {
  double drift = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double step_gain = 1.0 - std::exp(-static_cast<double>(steps) / spec.learning_steps[i]);
    drift = std::max(drift, std::abs(spec.asymptotic[i]) * step_gain);
  }
  return drift;
}

// ---------------------------------------------------------------------------

SyntheticOracle::SyntheticOracle(OracleSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

double SyntheticOracle::evaluate(const TrainingState& state, const GateVector& gates,
                                 std::uint64_t call_index) const {
  return sea::evaluate(spec_, state, gates, call_index);
}

std::optional<double> SyntheticOracle::noise_free_value(const TrainingState& state,
                                                        const GateVector& gates) const {
  return true_value(spec_, state, gates);
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      TraceRecord r;
      r.gates = doc.at("gates").get<std::string>();
      r.score = doc.at("score").get<double>();
      r.noise_seed = doc.value("noise_seed", std::uint64_t{0});
      if (r.gates.empty() || r.gates.find_first_not_of("01") != std::string::npos) {
        throw Error(ErrorCode::kMalformedTrace,
                    "line " + std::to_string(line_no) + ": gates must be a non-empty bitstring");
      }
      if (!records.empty() && records.front().gates.size() != r.gates.size()) {
        throw Error(ErrorCode::kMalformedTrace,
                    "line " + std::to_string(line_no) + ": gate bitstrings differ in length");
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedTrace, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (records.empty()) throw Error(ErrorCode::kMalformedTrace, "trace is empty");
  return records;
}

void write_trace(std::ostream& out, std::span<const TraceRecord> records) {
  for (const auto& r : records) {
    out << nlohmann::json{{"gates", r.gates}, {"score", r.score}, {"noise_seed", r.noise_seed}}.dump()
        << '\n';
  }
}

ReplayOracle::ReplayOracle(std::span<const TraceRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kMalformedTrace, "trace is empty");
  width_ = records.front().gates.size();
  for (const auto& r : records) {
    if (r.gates.size() != width_) throw Error(ErrorCode::kMalformedTrace, "gate widths differ");
    exact_.try_emplace({r.gates, r.noise_seed}, r.score);
    first_.try_emplace(r.gates, r.score);
  }
}

ReplayOracle ReplayOracle::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedTrace, "cannot open trace '" + path + "'");
  const auto records = read_trace(in);
  return ReplayOracle(records);
}

double ReplayOracle::evaluate(const TrainingState&, const GateVector& gates,
                              std::uint64_t call_index) const {
  const std::string key = to_bitstring(gates);
  if (auto it = exact_.find({key, call_index}); it != exact_.end()) return it->second;
  if (auto it = first_.find(key); it != first_.end()) return it->second;
  throw Error(ErrorCode::kUnknownConfiguration, "no recorded score for gates " + key);
}

double RecordingOracle::evaluate(const TrainingState& state, const GateVector& gates,
                                 std::uint64_t call_index) const {
  const double score = inner_.evaluate(state, gates, call_index);
  std::lock_guard lock(mutex_);
  records_.push_back({to_bitstring(gates), score, call_index});
  return score;
}

std::vector<TraceRecord> RecordingOracle::records() const {
  std::lock_guard lock(mutex_);
  auto out = records_;
  std::stable_sort(out.begin(), out.end(), [](const TraceRecord& a, const TraceRecord& b) {
    return a.noise_seed < b.noise_seed;
  });
  return out;
}

// ---------------------------------------------------------------------------

void SyntheticSpecParams::validate() const {
  if (!(base_score >= 0.0 && base_score <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "base_score must lie in [0,1]");
  }
  if (!(utility_scale > 0.0)) throw Error(ErrorCode::kInvalidParams, "utility_scale must be positive");
  if (!(harmful_fraction >= 0.0 && harmful_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "harmful_fraction must lie in [0,1]");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::kInvalidParams, "gamma must lie in (0,1]");
  if (!(noise >= 0.0)) throw Error(ErrorCode::kInvalidParams, "noise must be non-negative");
  if (!(warm_start >= 0.0 && warm_start <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "warm_start must lie in [0,1]");
  }
  if (!(min_learning_steps > 0.0 && max_learning_steps >= min_learning_steps)) {
    throw Error(ErrorCode::kInvalidParams, "learning-step range is invalid");
  }
}

nlohmann::json to_json(const SyntheticSpecParams& p) {
  return {{"base_score", p.base_score}, {"utility_scale", p.utility_scale},
          {"harmful_fraction", p.harmful_fraction}, {"gamma", p.gamma}, {"noise", p.noise},
          {"warm_start", p.warm_start}, {"min_learning_steps", p.min_learning_steps},
          {"max_learning_steps", p.max_learning_steps}};
}

SyntheticSpecParams synthetic_params_from_json(const nlohmann::json& doc) {
  SyntheticSpecParams p;
  try {
    p.base_score = doc.value("base_score", p.base_score);
    p.utility_scale = doc.value("utility_scale", p.utility_scale);
    p.harmful_fraction = doc.value("harmful_fraction", p.harmful_fraction);
    p.gamma = doc.value("gamma", p.gamma);
    p.noise = doc.value("noise", p.noise);
    p.warm_start = doc.value("warm_start", p.warm_start);
    p.min_learning_steps = doc.value("min_learning_steps", p.min_learning_steps);
    p.max_learning_steps = doc.value("max_learning_steps", p.max_learning_steps);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("synthetic oracle: ") + e.what());
  }
  p.validate();
  return p;
}

OracleSpec make_synthetic_spec(const AuditSpace& space, const SyntheticSpecParams& params,
                               double noise, int steps_per_cycle, std::uint64_t seed) {
  params.validate();
  Rng rng = make_rng(seed, 0x5eed0f5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Site quality and per-(site, family, topology) affinity, drawn in id order.
  std::map<std::pair<int, int>, double> site_quality;
  std::map<std::tuple<int, int, int, int>, double> affinity;
  std::map<std::tuple<int, int, int, int>, int> smallest_size;
  for (const auto& u : space.units()) {
    const std::pair site{u.site.layer, static_cast<int>(u.site.slot)};
    if (!site_quality.contains(site)) site_quality[site] = uniform(0.3, 1.0);
    const std::tuple key{u.site.layer, static_cast<int>(u.site.slot),
                         static_cast<int>(u.kind.family), static_cast<int>(u.kind.topology)};
    if (!affinity.contains(key)) affinity[key] = uniform(0.5, 1.5);
    auto [it, inserted] = smallest_size.try_emplace(key, u.kind.size);
    if (!inserted) it->second = std::min(it->second, u.kind.size);
  }

  OracleSpec spec;
  spec.base_score = params.base_score;
  spec.gamma = params.gamma;
  spec.noise = noise;
  spec.warm_start = params.warm_start;
  spec.seed = seed;
  std::map<std::pair<int, int>, int> group_of;
  for (const auto& u : space.units()) {
    const std::pair site{u.site.layer, static_cast<int>(u.site.slot)};
    const std::tuple key{u.site.layer, static_cast<int>(u.site.slot),
                         static_cast<int>(u.kind.family), static_cast<int>(u.kind.topology)};
    const int base_size = smallest_size[key];
    const double octaves =
        u.kind.size > 0 && base_size > 0 ? std::log2(static_cast<double>(u.kind.size) / base_size) : 0.0;
    const double size_gain = 1.0 + 0.35 * octaves;
    const bool harmful = unit(rng) < params.harmful_fraction;
    const double jitter = uniform(0.8, 1.2);
    double mu = params.utility_scale * site_quality[site] * affinity[key] * size_gain * jitter;
    if (harmful) mu = -params.utility_scale * uniform(0.05, 0.3);
    spec.asymptotic.push_back(mu);
    spec.learning_steps.push_back(uniform(params.min_learning_steps, params.max_learning_steps) *
                                  (1.0 + 0.25 * octaves));
    auto [it, inserted] = group_of.try_emplace(site, static_cast<int>(group_of.size()));
    spec.groups.push_back(it->second);
  }
  spec.drift = implied_drift(spec, steps_per_cycle);
  spec.validate();
  return spec;
}

}  // namespace sea
