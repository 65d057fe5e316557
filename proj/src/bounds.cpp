#include "sea/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sea/adapter_space.hpp"
#include "sea/allocator.hpp"
#include "sea/audit_sampler.hpp"
#include "sea/common.hpp"
#include "sea/error.hpp"
#include "sea/fsm_stabilizer.hpp"
#include "sea/stats.hpp"
#include "sea/utility_tracker.hpp"

namespace sea {

namespace {

BoundCheck finish(BoundCheck c) {
  c.passed = c.lower ? c.measured >= c.bound : c.measured <= c.tolerance * c.bound;
  return c;
}

// Two layers, one attention slot each, LoRA in three sizes: small enough for
// quick fuzzing but with real sibling groups for rank votes.
const AuditSpace& fuzz_space() {
  static const AuditSpace space = [] {
    BackboneDesc backbone;
    backbone.num_layers = 2;
    backbone.hidden_dims = {64, 64};
    backbone.param_count = 10'000'000;
    AuditSchema schema;
    for (int size : {4, 8, 16}) {
      schema.templates.push_back({Family::kLoRA, Topology::kPA, size, Slot::kAttention});
    }
    return build_audit_space(backbone, schema, InitialActive::kNone);
  }();
  return space;
}

}  // namespace

BoundCheck check_ema_variance(double beta, double sigma, int replicas, int audits, std::uint64_t seed) {
  if (replicas < 2 || audits < 1) throw Error(ErrorCode::kInvalidParams, "need >= 2 replicas and >= 1 audit");
  const SmoothingParams params{beta, 0.0, 5};
  params.validate();
  std::vector<double> finals(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> noise(1.0, sigma);
    UtilityTracker tracker(0, 5);
    for (int t = 0; t < audits; ++t) tracker.record(noise(rng), params, t);
    finals[static_cast<std::size_t>(r)] = tracker.ema();
  }
  BoundCheck c;
  c.name = "ema variance (beta=" + std::to_string(beta).substr(0, 4) + ")";
  c.measured = stats::variance(finals);
  c.bound = (1.0 - beta) * sigma * sigma / (1.0 + beta);
  c.tolerance = 1.1;
  return finish(c);
}

BoundCheck check_ema_drift(double beta, double drift, int audits) {
  const SmoothingParams params{beta, 0.0, 5};
  params.validate();
  UtilityTracker tracker(0, 5);
  double worst = 0.0;
  for (int t = 0; t < audits; ++t) {
    const double mu = drift * t;
    tracker.record(mu, params, t);
    worst = std::max(worst, std::abs(tracker.ema() - mu));
  }
  BoundCheck c;
  c.name = "ema drift bias (beta=" + std::to_string(beta).substr(0, 4) + ")";
  c.measured = worst;
  c.bound = drift * beta / (1.0 - beta);
  c.tolerance = 1.05;
  return finish(c);
}

BoundCheck check_fsm_exhaustive(int cycles, int tau) {
  if (cycles < 1 || cycles > 24) throw Error(ErrorCode::kInvalidParams, "exhaustive FSM check needs 1..24 cycles");
  int worst = 0;
  for (std::uint32_t seq = 0; seq < (1u << cycles); ++seq) {
    FsmState state(1, FsmParams{tau, tau});
    GateVector gates(1, false);
    for (int t = 0; t < cycles; ++t) {
      gates = filter_proposals(state, gates, GateVector{static_cast<bool>((seq >> t) & 1u)}).gates;
    }
    worst = std::max(worst, state.committed_changes());
  }
  BoundCheck c;
  c.name = "fsm chatter, exhaustive T=" + std::to_string(cycles) + " tau=" + std::to_string(tau);
  c.measured = worst;
  c.bound = cycles / tau;
  return finish(c);
}

BoundCheck check_fsm_adversarial(int cycles, int tau) {
  FsmState state(1, FsmParams{tau, tau});
  GateVector gates(1, false);
  for (int t = 0; t < cycles; ++t) gates = filter_proposals(state, gates, GateVector{!gates[0]}).gates;
  BoundCheck c;
  c.name = "fsm chatter, adversarial T=" + std::to_string(cycles) + " tau=" + std::to_string(tau);
  c.measured = state.committed_changes();
  c.bound = cycles / tau;
  return finish(c);
}

BoundCheck check_fsm_fuzz(int cycles, int tau, int runs, std::uint64_t seed) {
  const AuditSpace& space = fuzz_space();
  const std::size_t n = space.size();
  int worst = 0;
  bool ok = true;
  for (int r = 0; r < runs; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    std::bernoulli_distribution coin(0.5);
    // Mostly-stable proposals mixed with bursts of chatter.
    std::uniform_int_distribution<int> hold(1, 2 * tau);
    FsmState state(n, FsmParams{tau, tau});
    GateVector gates(n, false);
    GateVector proposal(n, false);
    int remaining = 0;
    for (int t = 0; t < cycles; ++t) {
      if (remaining-- <= 0) {
        for (std::size_t i = 0; i < n; ++i) proposal[i] = coin(rng);
        remaining = hold(rng);
      }
      gates = filter_cycle(state, space, gates, proposal).gates;
    }
    worst = std::max(worst, state.committed_changes());
    ok = ok && state.committed_changes() <= cycles / tau;
  }
  BoundCheck c;
  c.name = "fsm chatter, fuzzed T=" + std::to_string(cycles) + " tau=" + std::to_string(tau);
  c.measured = worst;
  c.bound = cycles / tau;
  c = finish(c);
  c.passed = c.passed && ok;
  return c;
}

BoundCheck check_coverage(std::size_t n, std::size_t m, double epsilon, int cycles, int seeds,
                          std::uint64_t seed) {
  const double rho = coverage_lower_bound(n, m, epsilon);
  const SamplerParams params{m, 0.3, epsilon};
  int worst = cycles;
  for (int s = 0; s < seeds; ++s) {
    Rng gate_rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(s));
    std::bernoulli_distribution on(0.2);
    GateVector gates(n);
    for (std::size_t i = 0; i < n; ++i) gates[i] = on(gate_rng);
    std::vector<int> probes(n, 0);
    for (int t = 0; t < cycles; ++t) {
      Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(s)), static_cast<std::uint64_t>(t));
      for (std::size_t id : sample_audit_batch(gates, probes, params, rng).ids) ++probes[id];
    }
    worst = std::min(worst, *std::min_element(probes.begin(), probes.end()));
  }
  BoundCheck c;
  c.name = "coverage floor (rho_c=" + std::to_string(rho).substr(0, 5) + ")";
  c.measured = worst;
  c.bound = rho * cycles - 4.0 * std::sqrt(rho * (1.0 - rho) * cycles);
  c.lower = true;
  return finish(c);
}

AllocBenchResult bench_allocator(int instances, int n_max, std::uint64_t seed) {
  if (n_max < 1 || static_cast<std::size_t>(n_max) > kBruteForceCap) {
    throw Error(ErrorCode::kTooLarge, "n_max must be in 1..20");
  }
  if (instances < 1) throw Error(ErrorCode::kInvalidParams, "instances must be at least 1");
  AllocBenchResult out;
  for (int k = 0; k < instances; ++k) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(k));
    const int n = std::uniform_int_distribution<int>(1, n_max)(rng);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_real_distribution<double> log_cost(std::log(1e-4), std::log(1e-2));
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<double> costs(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = score(rng);
      costs[static_cast<std::size_t>(i)] = std::exp(log_cost(rng));
      sum += costs[static_cast<std::size_t>(i)];
    }
    const double p_max = std::uniform_real_distribution<double>(0.1, 0.7)(rng) * sum;
    const GateVector eligible(static_cast<std::size_t>(n), true);
    const double best = brute_force_optimum(scores, costs, eligible, p_max).total_score;
    const double got = final_resolve(scores, costs, eligible, p_max).total_score;
    out.ratios.push_back(best > 0.0 ? got / best : 1.0);
  }
  out.min = *std::min_element(out.ratios.begin(), out.ratios.end());
  out.p10 = stats::quantile(out.ratios, 0.1);
  out.median = stats::median(out.ratios);
  const auto above = std::count_if(out.ratios.begin(), out.ratios.end(), [](double r) { return r >= 0.95; });
  out.share_above_95 = static_cast<double>(above) / static_cast<double>(out.ratios.size());
  return out;
}

}  // namespace sea
