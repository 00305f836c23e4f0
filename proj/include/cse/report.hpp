#pragma once
#include <cse/calibration.hpp>
#include <cse/grid.hpp>
#include <cse/validation.hpp>

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace cse {

// Shortest-exact decimal with 17 significant digits, '.' separator, no locale.
std::string format_double(double x);

nlohmann::json to_json(const Tile& tile);
nlohmann::json to_json(const Platten& platten);
Platten platten_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Threshold& t);
Threshold threshold_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const CalibrationResult& result);
nlohmann::json to_json(const BootstrapDiagnostic& diag);
nlohmann::json to_json(const ConfidenceSet& set);

// CSV writers. Each starts with a "# provenance: {...}" comment line.
void write_validation_csv(std::ostream& os, const Platten& platten, const ValidationReport& report,
                          const nlohmann::json& provenance);
void write_calibration_csv(std::ostream& os, const Platten& platten, const CalibrationResult& result,
                           const nlohmann::json& provenance);
void write_tiles_csv(std::ostream& os, const Platten& platten, const nlohmann::json& provenance);

}  // namespace cse
