#pragma once

#include "voltran/calibrate.hpp"
#include "voltran/cost.hpp"
#include "voltran/instruments.hpp"
#include "voltran/mc.hpp"
#include "voltran/statespace.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voltran {

/// Everything a run needs, as read from the JSON config.
struct RunConfig {
    double spot = 1.0;
    CostParams cost;
    GridConfig grid;
    std::vector<Instrument> instruments;
    OptimizerConfig optimizer;
    std::optional<McConfig> mc;
    std::string output_dir = "voltran_out";
};

/// Throws ConfigError naming the offending field. Unknown keys are rejected.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);

/// Parses JSON text; syntax errors become ConfigError with line and column.
[[nodiscard]] RunConfig parse_config_text(std::string_view text);

/// Reads and parses a config file.
[[nodiscard]] RunConfig load_config(const std::string& path);

}  // namespace voltran
