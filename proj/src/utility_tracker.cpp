#include "sea/utility_tracker.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sea/error.hpp"
#include "sea/stats.hpp"

namespace sea {

void SmoothingParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::kInvalidParams, "beta must lie in (0,1)");
  if (!(lambda_s >= 0.0)) throw Error(ErrorCode::kInvalidParams, "lambda_s must be non-negative");
  if (window < 3 || window > 5) throw Error(ErrorCode::kInvalidParams, "history window must be 3..5");
}

UtilityTracker::UtilityTracker(std::size_t unit_id, int window)
    : unit_id_(unit_id), window_(static_cast<std::size_t>(window)) {
  if (window < 3 || window > 5) throw Error(ErrorCode::kInvalidParams, "history window must be in 3..5");
}

void UtilityTracker::record(double u_raw, const SmoothingParams& params, int cycle) {
  if (!std::isfinite(u_raw)) {
    throw Error(ErrorCode::kNonFiniteUtility,
                "unit " + std::to_string(unit_id_) + " received a non-finite utility");
  }
  ema_ = probe_count_ == 0 ? u_raw : (1.0 - params.beta) * u_raw + params.beta * ema_;
  history_.push_back(ema_);
  while (history_.size() > window_) history_.pop_front();
  ++probe_count_;
  last_audit_cycle_ = cycle;
}

double UtilityTracker::robust_score(const SmoothingParams& params) const {
  if (probe_count_ == 0) {
    throw Error(ErrorCode::kNeverAudited, "unit " + std::to_string(unit_id_) + " has no audits");
  }
  if (history_.size() == 1) return history_.front();
  const std::vector<double> h(history_.begin(), history_.end());
  return stats::median(h) - params.lambda_s * stats::iqr(h);
}

UtilityTracker record_audit(UtilityTracker tracker, double u_raw, const SmoothingParams& params,
                            int cycle) {
  tracker.record(u_raw, params, cycle);
  return tracker;
}

}  // namespace sea
