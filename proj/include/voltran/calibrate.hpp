#pragma once

#include "voltran/cost.hpp"
#include "voltran/hjb.hpp"
#include "voltran/instruments.hpp"
#include "voltran/statespace.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace voltran {

struct LineSearchConfig {
    double c1 = 1e-4;     // Armijo sufficient-increase constant
    double shrink = 0.5;  // backtracking factor
    std::size_t max_trials = 40;
};

struct OptimizerConfig {
    double tol_price = 1e-6;  // weighted sup-norm on price errors
    std::size_t max_outer_iters = 200;
    LineSearchConfig line_search;
    bool use_bfgs = false;
    double policy_tol = 0.0;  // 0: 1e-8 * v_bar
    std::size_t policy_max_iters = 50;
};

struct ObjectiveValue {
    double value = 0.0;             // -lambda.c - phi(0, X0)
    std::vector<double> gradient;   // model price - target
    std::vector<double> prices;
    double phi0 = 0.0;
    double primal_cost = 0.0;
};

/// Dual objective and its gradient from one fused backward sweep.
[[nodiscard]] ObjectiveValue objective(std::span<const double> lambda, const CostSpec& cost,
                                       const std::vector<Instrument>& instruments, const StateGrid& grid,
                                       const DualOptions& options = {});

struct TraceEntry {
    std::size_t iteration = 0;
    double objective = 0.0;
    double max_abs_error = 0.0;  // max_i w_i |price_i - c_i|
    double step = 0.0;           // accepted line-search step
    std::size_t evaluations = 0; // cumulative objective evaluations
};

struct CalibrationReport {
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    std::vector<double> lambda_star;
    std::vector<double> model_prices;  // solver convention (calls shown as puts)
    std::vector<double> price_errors;
    double dual_value = 0.0;
    double primal_cost = 0.0;
    double duality_gap = 0.0;  // |V + lambda.(EG - c) - dual value|
    std::vector<TraceEntry> trace;
};

/// Maximises the dual objective over lambda on a prepared grid.
/// Instruments must already be in bounded-payoff form (no calls).
[[nodiscard]] CalibrationReport calibrate(const std::vector<Instrument>& instruments, const CostSpec& cost,
                                          const StateGrid& grid, const OptimizerConfig& config);

struct CalibrationRun {
    std::vector<Instrument> instruments;  // bounded-payoff form
    StateGrid grid;
    CalibrationReport report;
    DualSolution solution;  // surfaces at lambda_star
};

/// Full pipeline from user instruments: validation, call-to-put conversion,
/// grid construction, optimisation and a final sweep keeping the surfaces.
[[nodiscard]] CalibrationRun calibrate(const std::vector<Instrument>& instruments, const CostSpec& cost,
                                       const GridConfig& grid_config, double spot,
                                       const OptimizerConfig& config);

}  // namespace voltran
