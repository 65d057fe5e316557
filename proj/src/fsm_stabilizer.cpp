#include "sea/fsm_stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sea/error.hpp"

namespace sea {

void FsmParams::validate() const {
  if (tau_act < 1 || tau_rank < 1) throw Error(ErrorCode::kInvalidParams, "FSM thresholds must be >= 1");
}

FsmState::FsmState(std::size_t n, FsmParams params)
    : params_(params), votes_(n), flips_(n, 0) {
  params_.validate();
}

namespace {

struct RankMove {
  std::size_t from;
  std::size_t to;
};

double density(const BudgetGuard& guard, std::size_t id) {
  const double d = guard.scores[id] / guard.costs[id];
  return std::isnan(d) ? -std::numeric_limits<double>::infinity() : d;
}

}  // namespace

struct FsmStep {
  static FsmResult run(FsmState& state, const GateVector& current,
                       const std::vector<std::optional<bool>>& gate_targets,
                       const std::vector<std::optional<RankMove>>& rank_targets,
                       const std::vector<int>& target_sizes, const BudgetGuard* guard) {
    const std::size_t n = state.votes_.size();
    const FsmParams& p = state.params_;
    ++state.cycles_;

    std::vector<std::size_t> ready_off;
    std::vector<std::size_t> ready_on;
    std::vector<RankMove> ready_rank;
    for (std::size_t i = 0; i < n; ++i) {
      UnitVotes& v = state.votes_[i];
      if (gate_targets[i] && *gate_targets[i] != current[i]) {
        if (v.pending_gate == gate_targets[i]) {
          ++v.act_counter;
        } else {
          v.pending_gate = gate_targets[i];
          v.act_counter = 1;
        }
        if (v.act_counter >= p.tau_act) (*v.pending_gate ? ready_on : ready_off).push_back(i);
      } else {
        v.act_counter = 0;
        v.pending_gate.reset();
      }
      if (rank_targets[i]) {
        if (v.pending_size == target_sizes[i]) {
          ++v.rank_counter;
        } else {
          v.pending_size = target_sizes[i];
          v.rank_counter = 1;
        }
        if (v.rank_counter >= p.tau_rank) ready_rank.push_back(*rank_targets[i]);
      } else {
        v.rank_counter = 0;
        v.pending_size.reset();
      }
    }

    FsmResult result;
    result.gates = current;
    auto fits = [&](const GateVector& g) {
      return guard == nullptr || total_cost(g, guard->costs) <= guard->p_max;
    };
    auto by_density = [&](auto key) {
      return [&, key](const auto& a, const auto& b) {
        if (guard == nullptr) return key(a) < key(b);
        const double da = density(*guard, key(a));
        const double db = density(*guard, key(b));
        if (da != db) return da > db;
        return key(a) < key(b);
      };
    };

    for (std::size_t i : ready_off) result.gates[i] = false;
    std::stable_sort(ready_rank.begin(), ready_rank.end(),
                     by_density([](const RankMove& m) { return m.to; }));
    for (const RankMove& m : ready_rank) {
      GateVector trial = result.gates;
      trial[m.from] = false;
      trial[m.to] = true;
      if (fits(trial)) {
        result.gates = std::move(trial);
      } else {
        result.rejected.push_back(m.from);
        state.votes_[m.from].rank_counter = 0;
        state.votes_[m.from].pending_size.reset();
      }
    }
    std::stable_sort(ready_on.begin(), ready_on.end(), by_density([](std::size_t i) { return i; }));
    for (std::size_t i : ready_on) {
      GateVector trial = result.gates;
      trial[i] = true;
      if (fits(trial)) {
        result.gates = std::move(trial);
      } else {
        result.rejected.push_back(i);
        state.votes_[i].act_counter = 0;
        state.votes_[i].pending_gate.reset();
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (result.gates[i] != current[i]) {
        result.commits.push_back(i);
        ++state.flips_[i];
      }
    }
    result.changed = !result.commits.empty();
    if (result.changed) {
      ++state.committed_changes_;
      for (UnitVotes& v : state.votes_) v = UnitVotes{};
    }
    std::sort(result.rejected.begin(), result.rejected.end());
    return result;
  }
};

namespace {

void check_lengths(const FsmState& state, std::size_t a, std::size_t b) {
  if (a != state.size() || b != state.size()) {
    throw Error(ErrorCode::kLengthMismatch, "FSM inputs must match the number of units");
  }
}

std::optional<RankMove> resolve_rank(const AuditSpace& space, const GateVector& current,
                                     std::size_t id, int size) {
  if (!current[id]) throw Error(ErrorCode::kInvalidParams, "rank proposals apply to active units only");
  if (!space.resizable(id)) throw Error(ErrorCode::kInvalidParams, "unit family has a single size");
  if (space[id].kind.size == size) return std::nullopt;
  const auto sibling = space.sibling_with_size(id, size);
  if (!sibling) {
    throw Error(ErrorCode::kUnknownSibling,
                "unit " + std::to_string(id) + " has no sibling of size " + std::to_string(size));
  }
  return RankMove{id, *sibling};
}

}  // namespace

FsmResult filter_proposals(FsmState& state, const GateVector& current, const GateVector& proposed,
                           const BudgetGuard* guard) {
  check_lengths(state, current.size(), proposed.size());
  std::vector<std::optional<bool>> targets(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) targets[i] = proposed[i];
  return FsmStep::run(state, current, targets, std::vector<std::optional<RankMove>>(current.size()),
                      std::vector<int>(current.size(), 0), guard);
}

FsmResult filter_rank_proposals(FsmState& state, const AuditSpace& space, const GateVector& current,
                                std::span<const std::optional<int>> proposed_sizes,
                                const BudgetGuard* guard) {
  check_lengths(state, current.size(), proposed_sizes.size());
  if (space.size() != current.size()) throw Error(ErrorCode::kLengthMismatch, "space size mismatch");
  const std::size_t n = current.size();
  std::vector<std::optional<RankMove>> moves(n);
  std::vector<int> sizes(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!proposed_sizes[i]) continue;
    moves[i] = resolve_rank(space, current, i, *proposed_sizes[i]);
    sizes[i] = *proposed_sizes[i];
  }
  return FsmStep::run(state, current, std::vector<std::optional<bool>>(n), moves, sizes, guard);
}

FsmResult filter_cycle(FsmState& state, const AuditSpace& space, const GateVector& current,
                       const GateVector& proposed, const BudgetGuard* guard) {
  check_lengths(state, current.size(), proposed.size());
  if (space.size() != current.size()) throw Error(ErrorCode::kLengthMismatch, "space size mismatch");
  const std::size_t n = current.size();

  std::vector<std::optional<bool>> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = proposed[i];
  std::vector<std::optional<RankMove>> moves(n);
  std::vector<int> sizes(n, 0);

  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] || !space.resizable(i)) continue;
    std::vector<std::size_t> dropped;
    std::vector<std::size_t> added;
    for (std::size_t s : space.siblings(i)) {
      seen[s] = true;
      if (current[s] && !proposed[s]) dropped.push_back(s);
      if (!current[s] && proposed[s]) added.push_back(s);
    }
    // Siblings are listed in ascending size, so pairing is smallest-to-smallest.
    const std::size_t pairs = std::min(dropped.size(), added.size());
    for (std::size_t k = 0; k < pairs; ++k) {
      const std::size_t from = dropped[k];
      const std::size_t to = added[k];
      moves[from] = RankMove{from, to};
      sizes[from] = space[to].kind.size;
      targets[from] = current[from];
      targets[to] = current[to];
    }
  }
  return FsmStep::run(state, current, targets, moves, sizes, guard);
}

}  // namespace sea
