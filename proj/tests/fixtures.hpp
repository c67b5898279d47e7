#pragma once

#include "voltran/linpde.hpp"
#include "voltran/statespace.hpp"

#include <cmath>
#include <vector>

namespace testing {

// sigma(t, x) = 0.2 (1 + 0.1 tanh x)
inline double skew_vol(double x) { return 0.2 * (1.0 + 0.1 * std::tanh(x)); }
inline double flat_vol(double) { return 0.2; }

// Variance field sigma(x)^2 on every node of every time step.
template <class Vol>
voltran::Surface local_variance(const voltran::StateGrid& grid, Vol vol) {
    voltran::Surface beta(grid, grid.time.steps());
    for (std::size_t n = 0; n < grid.time.steps(); ++n) {
        auto s = beta.slice(n);
        for (std::size_t r = 0; r < grid.rows.size(); ++r)
            for (std::size_t i = grid.rows[r].lo; i < grid.spot.n_x; ++i) {
                const double v = vol(grid.spot.x(i));
                s[grid.index(r, i)] = v * v;
            }
    }
    return beta;
}

inline double price_on_grid(const voltran::StateGrid& grid, const voltran::Surface& beta,
                            const voltran::Instrument& inst) {
    voltran::LinearProblem p;
    p.grid = &grid;
    p.beta = &beta;
    p.jumps.push_back({grid.time.knot_of(inst.maturity), voltran::payoff_slice(grid, inst)});
    return voltran::solve_linear(p).initial_value;
}

// Sets every target to its price on `grid` under the local volatility `vol`.
template <class Vol>
void price_targets(std::vector<voltran::Instrument>& insts, const voltran::StateGrid& grid, Vol vol) {
    const voltran::Surface beta = local_variance(grid, vol);
    for (auto& inst : insts) inst.target_price = price_on_grid(grid, beta, inst);
}

}  // namespace testing
