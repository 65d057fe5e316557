#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sea {

// One row of the bound-verification table.
struct BoundCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 1.0;  // pass iff measured <= tolerance * bound (or >= for lower bounds)
  bool lower = false;      // true when the bound is a floor
  bool passed = false;
};

// Steady-state variance of the EMA under i.i.d. N(mu, sigma^2) utilities,
// measured across replicas at the last audit. Bound: (1-beta) sigma^2 / (1+beta).
BoundCheck check_ema_variance(double beta, double sigma, int replicas, int audits, std::uint64_t seed);

// Lag of the EMA behind a utility rising by `drift` per audit, noise-free.
// Bound: drift * beta / (1 - beta).
BoundCheck check_ema_drift(double beta, double drift, int audits);

// Largest committed-change count of a single unit over every on/off proposal
// sequence of length `cycles` (2^cycles sequences). Bound: floor(cycles / tau).
BoundCheck check_fsm_exhaustive(int cycles, int tau);

// Every cycle proposes the opposite of the committed gate, the sequence that
// commits as often as the vote rule allows.
BoundCheck check_fsm_adversarial(int cycles, int tau);

// Random multi-unit proposal streams, activity and rank votes mixed.
// Reports the worst T_c against floor(cycles / tau).
BoundCheck check_fsm_fuzz(int cycles, int tau, int runs, std::uint64_t seed);

// Frozen gates, n units, batches of m; the floor is
// rho_c * T - 4 sqrt(rho_c (1 - rho_c) T) with rho_c = epsilon * m / n.
BoundCheck check_coverage(std::size_t n, std::size_t m, double epsilon, int cycles, int seeds,
                          std::uint64_t seed);

struct AllocBenchResult {
  std::vector<double> ratios;  // final_resolve value / exhaustive optimum
  double min = 1.0;
  double p10 = 1.0;
  double median = 1.0;
  double share_above_95 = 1.0;
};

// Random knapsack instances with 1..n_max units (n_max <= 20), scores
// uniform in [0,1], costs log-uniform in [1e-4, 1e-2].
AllocBenchResult bench_allocator(int instances, int n_max, std::uint64_t seed);

}  // namespace sea
