#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sea/common.hpp"

namespace sea {

struct SamplerParams {
  std::size_t audit_batch = 16;  // M
  double active_fraction = 0.3;  // share of stratified slots drawn from active units
  double epsilon = 0.3;          // per-slot exploration probability

  void validate() const;
};

struct AuditBatch {
  std::vector<std::size_t> ids;              // ascending, no duplicates
  std::vector<std::size_t> exploration_ids;  // subset of ids filled by exploration
};

// Two-stage draw. Each of the M slots is an exploration slot with probability
// epsilon and is then filled uniformly, without replacement, from the
// least-probed quarter of all units (ties by id). The remaining k slots take
// round(active_fraction * k) active units and the rest inactive ones, with
// shortfalls spilling into the other stratum. Result size is min(M, N).
AuditBatch sample_audit_batch(const GateVector& gates, std::span<const int> probe_counts,
                              const SamplerParams& params, Rng& rng);

// The stratified stage on its own; `taken` marks units already in the batch.
std::vector<std::size_t> draw_stratified(const GateVector& gates, const std::vector<bool>& taken,
                                         std::size_t k, double active_fraction, Rng& rng);

// rho_c = epsilon * M / N.
double coverage_lower_bound(std::size_t n, std::size_t m, double epsilon);

}  // namespace sea
