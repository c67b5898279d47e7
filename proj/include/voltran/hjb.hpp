#pragma once

#include "voltran/cost.hpp"
#include "voltran/instruments.hpp"
#include "voltran/statespace.hpp"

#include <optional>
#include <span>
#include <vector>

namespace voltran {

struct DualOptions {
    /// Policy-iteration stopping threshold on max |delta beta|; 0 selects
    /// 1e-8 * v_bar.
    double tol_policy = 0.0;
    std::size_t max_policy_iters = 50;
    /// Keep phi and beta on every knot (needed for export, MC and the
    /// standalone linear solvers).
    bool keep_surfaces = true;
    /// Propagate the per-instrument price solves and the running-cost solve
    /// through the same backward sweep, reusing each step's final operator.
    bool with_tangents = false;
};

/// Linear solves carried along the dual sweep.
struct DualTangents {
    std::vector<double> prices;  // E[g_i] under the induced model
    double primal_cost = 0.0;    // E int F(beta) dt
};

struct DualSolution {
    Surface phi;   // knots 0..N
    Surface beta;  // steps 0..N-1; alpha = -beta/2
    double initial_value = 0.0;  // phi(0, X0, initial state)
    std::vector<std::size_t> policy_iters;  // per step, max over rows
    std::vector<double> policy_change;      // per step, final max |delta beta|
    std::vector<double> hjb_residual;       // per step, max |D_t phi + G*(z)|
    std::optional<DualTangents> tangents;
};

/// Terminal contribution of one priced claim: phi <- phi - lambda * values
/// at knot `knot`. `values` is one time slice.
struct PayoffJump {
    std::size_t knot = 0;
    std::vector<double> values;
};

/// Solves d_t phi + G*((phi_xx - phi_x)/2) = 0 backward from the horizon
/// with jumps phi <- phi - lambda_i g_i at each maturity, by implicit steps
/// and policy iteration. Throws SolverError on non-convergence or
/// non-finite values.
[[nodiscard]] DualSolution solve_dual(const CostSpec& cost, const std::vector<Instrument>& instruments,
                                      std::span<const double> lambda, const StateGrid& grid,
                                      const DualOptions& options = {});

/// Same, for arbitrary payoff slices. Tangent prices, if requested, are the
/// expectations of the given slices.
[[nodiscard]] DualSolution solve_dual(const CostSpec& cost, const std::vector<PayoffJump>& payoffs,
                                      std::span<const double> lambda, const StateGrid& grid,
                                      const DualOptions& options = {});

/// sigma = sqrt(beta) on every node.
[[nodiscard]] Surface extract_vol(const DualSolution& solution);

}  // namespace voltran
