#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "statlens/serialize.hpp"

namespace statlens {

// Malformed scenario input; the message names the failing JSON path.
struct SchemaError : Error {
  using Error::Error;
};

inline constexpr int kReportVersion = 1;

// A verification or optimization scenario, loaded from JSON:
//   {"kind": ..., "seed": ..., "mode": "rational"|"float", "payload": {...}}
struct Scenario {
  std::string id;
  std::string kind;
  std::uint64_t seed = 0;
  std::string mode = "rational";
  Json payload = Json::object();
};

struct CheckResult {
  std::string name;
  bool pass = true;
  Json details = Json::object();
};

// Machine-readable run report. Serialization is deterministic up to the
// wall_time_ms field.
struct Report {
  std::string scenario_id;
  std::string kind;
  std::uint64_t seed = 0;
  std::string mode;
  std::vector<CheckResult> checks;
  Json summary = Json::object();
  bool pass = true;
  double wall_time_ms = 0.0;

  Json to_json() const;
};

// Parses and validates the scenario envelope plus the kind-specific payload
// schema; throws SchemaError with a JSON-path diagnostic.
Scenario parse_scenario(const Json& j, const std::string& id);

// Executes the scenario's suite. Deterministic given (scenario, seed).
Report run_scenario(const Scenario& scenario);

// Builds a scenario of the given kind from generator parameters (sizes,
// counts, ...), deterministically from the seed.
Json generate_scenario(const std::string& kind, const Json& params, std::uint64_t seed);

const std::vector<std::string>& scenario_kinds();

}  // namespace statlens
