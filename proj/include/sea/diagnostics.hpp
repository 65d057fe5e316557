#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "sea/oracle.hpp"

namespace sea {

struct CycleDiagnostics {
  int cycle = 0;
  std::optional<double> value;   // noise-free value of the committed gates
  std::optional<double> regret;  // optimum - value, when the optimum is computable
  int committed_changes = 0;
  int coverage_min = 0;
};

struct Diagnostics {
  std::vector<int> coverage;  // probe count per unit
  int committed_changes = 0;
  std::int64_t evaluations = 0;
  std::optional<double> optimum_value;
  std::vector<CycleDiagnostics> cycles;
};

// Replays an event log. Values and regret need the ground truth; regret also
// needs at most 20 units. Training is reconstructed from the logged gates.
Diagnostics compute_diagnostics(std::span<const nlohmann::json> events, const OracleSpec* truth);

std::vector<nlohmann::json> read_event_log(std::istream& in);
void write_event_log(std::ostream& out, std::span<const nlohmann::json> events);

inline constexpr const char* kDiagnosticsCsvHeader = "cycle,value,regret,T_c,coverage_min";
void write_diagnostics_csv(std::ostream& out, const Diagnostics& diagnostics);

}  // namespace sea
