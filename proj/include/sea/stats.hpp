#pragma once

#include <span>
#include <vector>

namespace sea::stats {

// Sample quantile with linear interpolation between order statistics
// (h = (n-1)p, the "type 7" rule). Input need not be sorted.
double quantile(std::span<const double> values, double p);
double median(std::span<const double> values);
double iqr(std::span<const double> values);

double mean(std::span<const double> values);
// Unbiased (n-1) sample variance.
double variance(std::span<const double> values);

}  // namespace sea::stats
