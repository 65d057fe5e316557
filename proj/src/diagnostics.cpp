#include "sea/diagnostics.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sea/error.hpp"

namespace sea {

using nlohmann::json;

namespace {

const json& field(const json& record, const char* key) {
  if (!record.is_object() || !record.contains(key)) {
    throw Error(ErrorCode::kMalformedLog, std::string("event record lacks '") + key + "'");
  }
  return record.at(key);
}

}  // namespace

Diagnostics compute_diagnostics(std::span<const json> events, const OracleSpec* truth) {
  if (events.empty() || field(events.front(), "type") != "header") {
    throw Error(ErrorCode::kMalformedLog, "event log must start with a header record");
  }
  Diagnostics d;
  try {
    const json& header = events.front();
    const auto n = field(header, "num_units").get<std::size_t>();
    const int steps = field(header, "steps_per_cycle").get<int>();
    const int cycles = field(header, "cycles").get<int>();
    const double p_max = field(header, "p_max").get<double>();
    const auto costs = field(header, "costs").get<std::vector<double>>();
    GateVector gates = from_bitstring(field(header, "initial_gates").get<std::string>());
    if (gates.size() != n || costs.size() != n) {
      throw Error(ErrorCode::kMalformedLog, "header sizes disagree with num_units");
    }
    if (truth != nullptr && truth->size() != n) truth = nullptr;

    if (truth != nullptr && n <= kOracleOptimumCap) {
      // Fixed comparator: one configuration trained for the whole horizon.
      TrainingState horizon(n);
      std::fill(horizon.steps.begin(), horizon.steps.end(), static_cast<double>(cycles) * steps);
      d.optimum_value = oracle_optimum(*truth, horizon, costs, p_max).value;
    }

    d.coverage.assign(n, 0);
    TrainingState training(n);
    for (std::size_t k = 1; k < events.size(); ++k) {
      const json& record = events[k];
      const std::string type = field(record, "type").get<std::string>();
      if (type == "final") break;
      if (type != "cycle") throw Error(ErrorCode::kMalformedLog, "unknown record type '" + type + "'");

      training = train_step(std::move(training), gates, field(field(record, "search"), "steps").get<int>());
      const json& audit = field(record, "audit");
      for (const json& r : field(audit, "records")) {
        const auto id = field(r, "unit_id").get<std::size_t>();
        if (id >= n) throw Error(ErrorCode::kMalformedLog, "unit id out of range");
        d.coverage[id] = field(r, "probe_count").get<int>();
      }
      d.evaluations += field(audit, "evaluations").get<std::int64_t>();
      gates = from_bitstring(field(record, "gates").get<std::string>());
      if (gates.size() != n) throw Error(ErrorCode::kMalformedLog, "gate bitstring has the wrong width");

      CycleDiagnostics c;
      c.cycle = field(record, "cycle").get<int>();
      c.committed_changes = field(field(record, "fsm"), "T_c").get<int>();
      c.coverage_min = *std::min_element(d.coverage.begin(), d.coverage.end());
      if (truth != nullptr) {
        c.value = true_value(*truth, training, gates);
        if (d.optimum_value) c.regret = *d.optimum_value - *c.value;
      }
      d.committed_changes = c.committed_changes;
      d.cycles.push_back(c);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedLog, e.what());
  }
  return d;
}

std::vector<json> read_event_log(std::istream& in) {
  std::vector<json> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedLog, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

void write_event_log(std::ostream& out, std::span<const json> events) {
  for (const json& e : events) out << e.dump() << '\n';
}

void write_diagnostics_csv(std::ostream& out, const Diagnostics& diagnostics) {
  auto cell = [](const std::optional<double>& x) {
    if (!x) return std::string();
    std::ostringstream s;
    s.precision(10);
    s << *x;
    return s.str();
  };
  out << kDiagnosticsCsvHeader << '\n';
  for (const auto& c : diagnostics.cycles) {
    out << c.cycle << ',' << cell(c.value) << ',' << cell(c.regret) << ',' << c.committed_changes
        << ',' << c.coverage_min << '\n';
  }
}

}  // namespace sea
