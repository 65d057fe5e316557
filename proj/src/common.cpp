#include "sea/common.hpp"

#include "sea/error.hpp"

namespace sea {

std::string to_bitstring(const GateVector& gates) {
  std::string bits(gates.size(), '0');
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i]) bits[i] = '1';
  }
  return bits;
}

GateVector from_bitstring(std::string_view bits) {
  GateVector gates(bits.size(), false);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      gates[i] = true;
    } else if (bits[i] != '0') {
      throw Error(ErrorCode::kInvalidParams, "gate bitstring may only contain '0' and '1'");
    }
  }
  return gates;
}

std::size_t count_active(const GateVector& gates) {
  std::size_t n = 0;
  for (bool g : gates) n += g ? 1 : 0;
  return n;
}

std::vector<std::size_t> active_ids(const GateVector& gates) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i]) ids.push_back(i);
  }
  return ids;
}

double total_cost(const GateVector& gates, std::span<const double> costs) {
  if (gates.size() != costs.size()) {
    throw Error(ErrorCode::kLengthMismatch, "gates and costs differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i]) sum += costs[i];
  }
  return sum;
}

double total_score(const GateVector& gates, std::span<const double> scores) {
  if (gates.size() != scores.size()) {
    throw Error(ErrorCode::kLengthMismatch, "gates and scores differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i]) sum += scores[i];
  }
  return sum;
}

}  // namespace sea
