#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sea/common.hpp"

namespace sea {

struct AllocationProposal {
  GateVector gates;
  double total_cost = 0.0;
  double total_score = 0.0;  // sum of selected scores
};

struct AllocatorParams {
  double p_max = 0.002;  // budget as a fraction of backbone parameters
  double mu_eff = 0.02;  // replacement margin, in score units

  void validate() const;
};

// Eligible units with positive score, best density r/c first. Densities within
// a relative 1e-12 count as tied; ties prefer lower cost, then lower id.
std::vector<std::size_t> density_order(std::span<const double> scores, std::span<const double> costs,
                                       const GateVector& eligible);

// Walks density_order and keeps every unit that still fits under p_max.
// Units with score <= 0 are never selected.
AllocationProposal greedy_allocate(std::span<const double> scores, std::span<const double> costs,
                                   const GateVector& eligible, double p_max);

// Filters the proposal against the current gates. Activations that fit without
// evicting anything pass through, as do drops that free no budget for a
// newcomer. A newcomer that only fits by evicting dropped units is adopted iff
// its score exceeds the evicted scores' sum by more than mu_eff; otherwise the
// evicted units stay and the newcomer is discarded. mu_eff <= 0 disables the
// guard and returns the proposal unchanged.
GateVector apply_hysteresis(const GateVector& current, const AllocationProposal& proposal,
                            std::span<const double> scores, std::span<const double> costs,
                            double p_max, double mu_eff);

// Better of density-greedy and the best affordable singleton, then
// best-improvement single swaps until none improves the total score.
AllocationProposal final_resolve(std::span<const double> scores, std::span<const double> costs,
                                 const GateVector& eligible, double p_max);

inline constexpr std::size_t kBruteForceCap = 20;

// Exhaustive optimum over the eligible units (at most kBruteForceCap).
// Ties: lower total cost, then lexicographically smaller gate vector.
AllocationProposal brute_force_optimum(std::span<const double> scores, std::span<const double> costs,
                                       const GateVector& eligible, double p_max);

AllocationProposal make_proposal(GateVector gates, std::span<const double> scores,
                                 std::span<const double> costs);

}  // namespace sea
