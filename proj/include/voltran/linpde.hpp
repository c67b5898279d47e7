#pragma once

#include "voltran/cost.hpp"
#include "voltran/hjb.hpp"
#include "voltran/instruments.hpp"
#include "voltran/statespace.hpp"

#include <cstddef>
#include <vector>

namespace voltran {

/// Backward Feynman-Kac problem
///
///     d_t u + alpha u_x + beta/2 u_xx + f = 0,  u <- u + jump at given knots,
///
/// on the grid's rows, with the same transition and far-field treatment as
/// the dual sweep. Fields are indexed by time step.
struct LinearProblem {
    struct Jump {
        std::size_t knot = 0;
        std::vector<double> values;  // one time slice
    };

    const StateGrid* grid = nullptr;
    const Surface* beta = nullptr;
    const Surface* drift = nullptr;   // nullptr: alpha = -beta/2
    const Surface* source = nullptr;  // nullptr: f = 0
    std::vector<Jump> jumps;
};

struct LinearSolution {
    double initial_value = 0.0;  // u(0, X0, initial state)
    Surface values;              // knots 0..N
};

/// Throws ContractViolation when a field or jump does not match the grid.
[[nodiscard]] LinearSolution solve_linear(const LinearProblem& problem);

/// E[g_i] for every instrument under the model induced by a solved dual,
/// i.e. minus the derivative of phi(0, X0) with respect to lambda_i.
/// Independent solves are spread over `threads` workers.
[[nodiscard]] std::vector<double> model_prices(const DualSolution& dual,
                                               const std::vector<Instrument>& instruments,
                                               const StateGrid& grid, std::size_t threads = 1);

/// E int F(beta) dt under the model induced by a solved dual.
[[nodiscard]] double primal_cost(const DualSolution& dual, const CostSpec& cost, const StateGrid& grid);

}  // namespace voltran
