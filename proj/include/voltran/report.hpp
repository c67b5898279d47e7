#pragma once

#include "voltran/calibrate.hpp"
#include "voltran/mc.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace voltran {

/// Report document. `user_instruments` are the instruments as configured;
/// prices of converted calls are shown in call terms.
[[nodiscard]] nlohmann::json report_json(const CalibrationRun& run, const std::vector<Instrument>& user_instruments,
                                         double spot, const McResult* mc);

[[nodiscard]] nlohmann::json grid_json(const StateGrid& grid);

/// "iteration,objective,max_abs_error,step,evaluations"
void write_trace_csv(std::ostream& os, const CalibrationReport& report);

/// Writes report.json, trace.csv, surfaces/sigma.csv and surfaces/phi.csv.
void write_outputs(const std::filesystem::path& dir, const CalibrationRun& run, const nlohmann::json& report);

}  // namespace voltran
