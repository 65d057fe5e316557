#include "sea/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sea/error.hpp"

namespace sea::stats {

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::kInvalidParams, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidParams, "quantile level outside [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double iqr(std::span<const double> values) {
  return quantile(values, 0.75) - quantile(values, 0.25);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidParams, "mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::kInvalidParams, "variance needs two samples");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

}  // namespace sea::stats
