#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace sea {

struct SmoothingParams {
  double beta = 0.9;      // EMA decay
  double lambda_s = 0.1;  // IQR shrinkage weight; larger values hurt at high noise
  int window = 5;         // audit-history length H, 3..5

  void validate() const;
};

// Per-unit audit state: EMA of raw utilities plus a short FIFO of the smoothed
// values, from which the robust score median - lambda_s * IQR is read.
class UtilityTracker {
 public:
  explicit UtilityTracker(std::size_t unit_id = 0, int window = 5);

  // First observation seeds the EMA; afterwards ema = (1-beta)*u + beta*ema.
  void record(double u_raw, const SmoothingParams& params, int cycle);

  // Throws NeverAudited before the first record().
  double robust_score(const SmoothingParams& params) const;

  std::size_t unit_id() const { return unit_id_; }
  double ema() const { return ema_; }
  const std::deque<double>& history() const { return history_; }
  std::size_t window() const { return window_; }
  int probe_count() const { return probe_count_; }
  int last_audit_cycle() const { return last_audit_cycle_; }
  bool audited() const { return probe_count_ > 0; }

 private:
  std::size_t unit_id_;
  std::size_t window_;
  double ema_ = 0.0;
  std::deque<double> history_;
  int probe_count_ = 0;
  int last_audit_cycle_ = -1;
};

UtilityTracker record_audit(UtilityTracker tracker, double u_raw, const SmoothingParams& params,
                            int cycle);

}  // namespace sea
