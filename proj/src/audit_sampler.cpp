#include "sea/audit_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "sea/error.hpp"

namespace sea {

void SamplerParams::validate() const {
  if (audit_batch == 0) throw Error(ErrorCode::kInvalidParams, "audit batch size must be positive");
  if (!(active_fraction >= 0.0 && active_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "active_fraction must lie in [0,1]");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "epsilon must lie in (0,1]");
  }
}

namespace {

std::size_t uniform_index(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng);
}

// Partial Fisher-Yates: the first k entries of `pool` become a uniform sample.
void take_uniform(std::vector<std::size_t>& pool, std::size_t k, Rng& rng,
                  std::vector<std::size_t>& out) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out.push_back(pool[i]);
  }
}

}  // namespace

std::vector<std::size_t> draw_stratified(const GateVector& gates, const std::vector<bool>& taken,
                                         std::size_t k, double active_fraction, Rng& rng) {
  std::vector<std::size_t> active;
  std::vector<std::size_t> inactive;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (taken[i]) continue;
    (gates[i] ? active : inactive).push_back(i);
  }
  k = std::min(k, active.size() + inactive.size());
  const auto target = static_cast<std::size_t>(std::lround(active_fraction * static_cast<double>(k)));
  std::size_t n_active = std::min(target, active.size());
  std::size_t n_inactive = std::min(k - n_active, inactive.size());
  n_active = std::min(k - n_inactive, active.size());

  std::vector<std::size_t> out;
  take_uniform(active, n_active, rng, out);
  take_uniform(inactive, n_inactive, rng, out);
  return out;
}

AuditBatch sample_audit_batch(const GateVector& gates, std::span<const int> probe_counts,
                              const SamplerParams& params, Rng& rng) {
  params.validate();
  const std::size_t n = gates.size();
  if (n == 0) throw Error(ErrorCode::kInvalidParams, "cannot sample from an empty audit space");
  if (probe_counts.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "probe counts and gates differ in length");
  }
  const std::size_t m = std::min(params.audit_batch, n);
  const std::size_t quartile = std::max<std::size_t>(1, (n + 3) / 4);

  std::bernoulli_distribution explore(params.epsilon);
  std::size_t n_explore = 0;
  for (std::size_t slot = 0; slot < m; ++slot) n_explore += explore(rng) ? 1 : 0;

  std::vector<bool> taken(n, false);
  AuditBatch batch;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probe_counts[a] < probe_counts[b];
  });
  // The quartile is fixed for the whole batch; once it is used up, further
  // exploration slots take the least-probed remaining unit.
  std::vector<std::size_t> pool(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(quartile));
  std::size_t next_fallback = quartile;
  for (std::size_t slot = 0; slot < n_explore; ++slot) {
    std::size_t chosen;
    if (!pool.empty()) {
      const std::size_t k = uniform_index(pool.size(), rng);
      chosen = pool[k];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      chosen = order[next_fallback++];
    }
    taken[chosen] = true;
    batch.exploration_ids.push_back(chosen);
  }

  batch.ids = batch.exploration_ids;
  const auto rest = draw_stratified(gates, taken, m - n_explore, params.active_fraction, rng);
  batch.ids.insert(batch.ids.end(), rest.begin(), rest.end());
  std::sort(batch.ids.begin(), batch.ids.end());
  std::sort(batch.exploration_ids.begin(), batch.exploration_ids.end());
  return batch;
}

double coverage_lower_bound(std::size_t n, std::size_t m, double epsilon) {
  if (m < 1 || n < m || !(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "coverage bound needs N >= M >= 1 and epsilon in (0,1]");
  }
  return epsilon * static_cast<double>(m) / static_cast<double>(n);
}

}  // namespace sea
