#pragma once

#include "voltran/instruments.hpp"
#include "voltran/statespace.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace voltran {

struct McConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 0;  // 0: four steps per PDE time step
    std::uint64_t seed = 20240601;
    bool antithetic = false;
    /// Sample the running minimum inside each step from the Brownian bridge
    /// instead of monitoring only at the simulation dates.
    bool brownian_bridge = true;
};

struct McEstimate {
    std::string id;
    double price = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double z_score = 0.0;
};

struct MartingaleCheck {
    double maturity = 0.0;
    double mean = 0.0;  // mean of exp(X_T)
    double std_error = 0.0;
    double z_score = 0.0;  // (mean - S0) / stderr
};

struct McResult {
    std::vector<McEstimate> instruments;
    std::vector<MartingaleCheck> martingale;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;

    /// Every instrument and every maturity within `bound` standard errors.
    [[nodiscard]] bool passes(double bound = 3.0) const;
};

/// Simulates dX = -sigma^2/2 dt + sigma dW with sigma read from `sigma`
/// (time-step slices over the grid rows) and reprices every instrument.
/// Instruments must be in bounded-payoff form and covered by the grid state.
/// Paths draw from independent streams keyed by (seed, path), so results do
/// not depend on `threads`.
[[nodiscard]] McResult simulate_and_price(const Surface& sigma, const std::vector<Instrument>& instruments,
                                          const StateGrid& grid, const McConfig& config,
                                          std::size_t threads = 1);

}  // namespace voltran
