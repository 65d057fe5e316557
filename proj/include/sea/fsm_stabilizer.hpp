#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sea/adapter_space.hpp"
#include "sea/common.hpp"

namespace sea {

struct FsmParams {
  int tau_act = 3;
  int tau_rank = 3;

  void validate() const;
};

struct UnitVotes {
  int act_counter = 0;
  std::optional<bool> pending_gate;
  int rank_counter = 0;
  std::optional<int> pending_size;
};

// Vote counters for every unit plus the committed-change count T_c. Any cycle
// that commits a change clears every counter, so consecutive commit cycles are
// at least min(tau_act, tau_rank) cycles apart.
class FsmState {
 public:
  FsmState() = default;
  FsmState(std::size_t n, FsmParams params);

  std::size_t size() const { return votes_.size(); }
  const FsmParams& params() const { return params_; }
  const UnitVotes& votes(std::size_t id) const { return votes_.at(id); }
  int committed_changes() const { return committed_changes_; }
  int flips(std::size_t id) const { return flips_.at(id); }
  int cycles() const { return cycles_; }

 private:
  friend struct FsmStep;

  FsmParams params_;
  std::vector<UnitVotes> votes_;
  std::vector<int> flips_;
  int committed_changes_ = 0;
  int cycles_ = 0;
};

// Budget re-check for simultaneous commits: activations and resizes are applied
// best density (score / cost) first while they fit under p_max.
struct BudgetGuard {
  std::span<const double> scores;
  std::span<const double> costs;
  double p_max = 1.0;
};

struct FsmResult {
  GateVector gates;
  std::vector<std::size_t> commits;   // units whose gate changed this cycle
  std::vector<std::size_t> rejected;  // ready to commit but blocked by the budget
  bool changed = false;
};

// One cycle of activity votes. Each call counts as one cycle.
FsmResult filter_proposals(FsmState& state, const GateVector& current, const GateVector& proposed,
                           const BudgetGuard* guard = nullptr);

// One cycle of rank votes: proposed_sizes[j] asks active unit j to become its
// same-site sibling of that size.
FsmResult filter_rank_proposals(FsmState& state, const AuditSpace& space, const GateVector& current,
                                std::span<const std::optional<int>> proposed_sizes,
                                const BudgetGuard* guard = nullptr);

// Loop entry point: sibling swaps inside the proposal (an active unit dropped
// while a same-site sibling of another size is added) become rank votes, all
// other differences become activity votes, and both share one cycle.
FsmResult filter_cycle(FsmState& state, const AuditSpace& space, const GateVector& current,
                       const GateVector& proposed, const BudgetGuard* guard = nullptr);

}  // namespace sea
