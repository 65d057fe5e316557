#include "sea/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sea/error.hpp"

namespace sea {

void AllocatorParams::validate() const {
  if (!(p_max > 0.0 && p_max <= 1.0)) throw Error(ErrorCode::kInvalidParams, "p_max must lie in (0,1]");
  if (!(mu_eff >= 0.0)) throw Error(ErrorCode::kInvalidParams, "mu_eff must be non-negative");
}

namespace {

void check_inputs(std::span<const double> scores, std::span<const double> costs,
                  const GateVector& eligible) {
  if (scores.size() != costs.size() || eligible.size() != costs.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scores, costs and eligibility differ in length");
  }
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!(costs[i] > 0.0)) throw Error(ErrorCode::kNonPositiveCost, "unit costs must be positive");
    if (eligible[i] && !std::isfinite(scores[i])) {
      throw Error(ErrorCode::kInvalidParams, "eligible units need finite scores");
    }
  }
}

bool denser(std::size_t a, std::size_t b, std::span<const double> scores,
            std::span<const double> costs) {
  const double da = scores[a] / costs[a];
  const double db = scores[b] / costs[b];
  const double tol = 1e-12 * std::max(std::abs(da), std::abs(db));
  if (da > db + tol) return true;
  if (db > da + tol) return false;
  if (costs[a] != costs[b]) return costs[a] < costs[b];
  return a < b;
}

bool fits(const GateVector& gates, std::span<const double> costs, double p_max) {
  return total_cost(gates, costs) <= p_max;
}

}  // namespace

AllocationProposal make_proposal(GateVector gates, std::span<const double> scores,
                                 std::span<const double> costs) {
  AllocationProposal p;
  p.total_cost = total_cost(gates, costs);
  double score = 0.0;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i]) score += scores[i];
  }
  p.total_score = score;
  p.gates = std::move(gates);
  return p;
}

std::vector<std::size_t> density_order(std::span<const double> scores, std::span<const double> costs,
                                       const GateVector& eligible) {
  check_inputs(scores, costs, eligible);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (eligible[i] && scores[i] > 0.0) pool.push_back(i);
  }
  // Selection order rather than std::sort: the tolerant tie rule is not a
  // strict weak ordering.
  std::vector<std::size_t> order;
  order.reserve(pool.size());
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < pool.size(); ++k) {
      if (denser(pool[k], pool[best], scores, costs)) best = k;
    }
    order.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return order;
}

AllocationProposal greedy_allocate(std::span<const double> scores, std::span<const double> costs,
                                   const GateVector& eligible, double p_max) {
  GateVector gates(scores.size(), false);
  for (std::size_t id : density_order(scores, costs, eligible)) {
    gates[id] = true;
    if (!fits(gates, costs, p_max)) gates[id] = false;
  }
  return make_proposal(std::move(gates), scores, costs);
}

GateVector apply_hysteresis(const GateVector& current, const AllocationProposal& proposal,
                            std::span<const double> scores, std::span<const double> costs,
                            double p_max, double mu_eff) {
  const std::size_t n = current.size();
  if (proposal.gates.size() != n || scores.size() != n || costs.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "hysteresis inputs differ in length");
  }
  if (mu_eff <= 0.0) return proposal.gates;

  GateVector newcomers(n, false);
  std::vector<bool> dropped(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    newcomers[i] = proposal.gates[i] && !current[i];
    dropped[i] = current[i] && !proposal.gates[i];
  }
  std::vector<bool> retained(n, false);
  GateVector result = current;

  for (std::size_t k : density_order(scores, costs, newcomers)) {
    GateVector trial = result;
    trial[k] = true;
    if (fits(trial, costs, p_max)) {
      result = std::move(trial);
      continue;
    }
    std::vector<std::size_t> evictable;
    for (std::size_t j = 0; j < n; ++j) {
      if (dropped[j] && result[j]) evictable.push_back(j);
    }
    std::stable_sort(evictable.begin(), evictable.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<std::size_t> evicted;
    for (std::size_t j : evictable) {
      trial[j] = false;
      evicted.push_back(j);
      if (fits(trial, costs, p_max)) break;
    }
    if (!fits(trial, costs, p_max)) continue;
    double displaced = 0.0;
    for (std::size_t j : evicted) displaced += scores[j];
    if (scores[k] - displaced > mu_eff) {
      result = std::move(trial);
    } else {
      for (std::size_t j : evicted) retained[j] = true;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (dropped[j] && result[j] && !retained[j]) result[j] = false;
  }
  if (!fits(result, costs, p_max)) return proposal.gates;
  return result;
}

AllocationProposal final_resolve(std::span<const double> scores, std::span<const double> costs,
                                 const GateVector& eligible, double p_max) {
  AllocationProposal best = greedy_allocate(scores, costs, eligible, p_max);

  std::optional<std::size_t> single;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!eligible[i] || scores[i] <= 0.0 || costs[i] > p_max) continue;
    if (!single || scores[i] > scores[*single] ||
        (scores[i] == scores[*single] && costs[i] < costs[*single])) {
      single = i;
    }
  }
  if (single && scores[*single] > best.total_score) {
    GateVector g(scores.size(), false);
    g[*single] = true;
    best = make_proposal(std::move(g), scores, costs);
  }

  GateVector gates = best.gates;
  for (;;) {
    double best_gain = 0.0;
    std::optional<std::pair<std::size_t, std::size_t>> swap;
    for (std::size_t s = 0; s < gates.size(); ++s) {
      if (!gates[s]) continue;
      for (std::size_t u = 0; u < gates.size(); ++u) {
        if (gates[u] || !eligible[u] || scores[u] <= 0.0) continue;
        const double gain = scores[u] - scores[s];
        if (gain <= best_gain) continue;
        GateVector trial = gates;
        trial[s] = false;
        trial[u] = true;
        if (!fits(trial, costs, p_max)) continue;
        best_gain = gain;
        swap = {s, u};
      }
    }
    if (!swap) break;
    gates[swap->first] = false;
    gates[swap->second] = true;
  }
  return make_proposal(std::move(gates), scores, costs);
}

AllocationProposal brute_force_optimum(std::span<const double> scores, std::span<const double> costs,
                                       const GateVector& eligible, double p_max) {
  check_inputs(scores, costs, eligible);
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (eligible[i]) ids.push_back(i);
  }
  if (ids.size() > kBruteForceCap) {
    throw Error(ErrorCode::kTooLarge, "brute force is capped at 20 eligible units");
  }
  const std::uint64_t subsets = std::uint64_t{1} << ids.size();
  std::uint64_t best_mask = 0;
  double best_score = 0.0;
  double best_cost = 0.0;
  // Bit j of a mask selects ids[j]; ids ascend, so a lexicographically smaller
  // gate vector is the mask whose lowest differing bit is clear.
  auto lex_smaller = [](std::uint64_t a, std::uint64_t b) {
    const std::uint64_t diff = a ^ b;
    return diff != 0 && (a & (diff & (~diff + 1))) == 0;
  };
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    double cost = 0.0;
    double score = 0.0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (mask & (std::uint64_t{1} << j)) {
        cost += costs[ids[j]];
        score += scores[ids[j]];
      }
    }
    if (cost > p_max) continue;
    const bool better = score > best_score ||
                        (score == best_score && cost < best_cost) ||
                        (score == best_score && cost == best_cost && lex_smaller(mask, best_mask));
    if (better) {
      best_mask = mask;
      best_score = score;
      best_cost = cost;
    }
  }
  GateVector gates(scores.size(), false);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (best_mask & (std::uint64_t{1} << j)) gates[ids[j]] = true;
  }
  return make_proposal(std::move(gates), scores, costs);
}

}  // namespace sea
