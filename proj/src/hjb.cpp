#include "voltran/hjb.hpp"

#include "stencil.hpp"
#include "voltran/errors.hpp"

#include <algorithm>
#include <cmath>

namespace voltran {

DualSolution solve_dual(const CostSpec& cost, const std::vector<Instrument>& instruments,
                        std::span<const double> lambda, const StateGrid& grid, const DualOptions& options) {
    if (lambda.size() != instruments.size())
        throw ContractViolation("solve_dual: lambda length differs from instrument count");
    std::vector<PayoffJump> payoffs;
    payoffs.reserve(instruments.size());
    for (const auto& inst : instruments)
        payoffs.push_back({grid.time.knot_of(inst.maturity), payoff_slice(grid, inst)});
    return solve_dual(cost, payoffs, lambda, grid, options);
}

DualSolution solve_dual(const CostSpec& cost, const std::vector<PayoffJump>& payoff_jumps,
                        std::span<const double> lambda, const StateGrid& grid, const DualOptions& options) {
    if (lambda.size() != payoff_jumps.size())
        throw ContractViolation("solve_dual: lambda length differs from payoff count");
    const std::size_t N = grid.time.steps();
    const std::size_t S = grid.slice_size;
    const std::size_t m = payoff_jumps.size();
    const double dx = grid.spot.dx;
    const double tol = options.tol_policy > 0.0 ? options.tol_policy : 1e-8 * cost.v_bar;
    std::vector<std::vector<std::size_t>> by_knot(N + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& j = payoff_jumps[i];
        if (j.knot == 0 || j.knot > N || j.values.size() != S)
            throw ContractViolation("solve_dual: payoff " + std::to_string(i) + " does not match the grid");
        by_knot[j.knot].push_back(i);
    }
    auto payoff = [&](std::size_t i) -> const std::vector<double>& { return payoff_jumps[i].values; };

    DualSolution sol;
    if (options.keep_surfaces) {
        sol.phi = Surface(grid, N + 1);
        sol.beta = Surface(grid, N, cost.v_bar);
    }
    sol.policy_iters.assign(N, 0);
    sol.policy_change.assign(N, 0.0);
    sol.hjb_residual.assign(N, 0.0);

    // Tangent columns: one price solve per instrument, then the running cost.
    const std::size_t n_tan = options.with_tangents ? m + 1 : 0;
    std::vector<std::vector<double>> tan_next(n_tan, std::vector<double>(S, 0.0));
    std::vector<std::vector<double>> tan_cur(n_tan, std::vector<double>(S, 0.0));

    std::vector<double> next(S, 0.0);
    std::vector<double> cur(S, 0.0);
    for (std::size_t i : by_knot[N]) {
        for (std::size_t k = 0; k < S; ++k) next[k] -= lambda[i] * payoff(i)[k];
        if (n_tan) tan_next[i] = payoff(i);
    }
    apply_row_links(grid, next);
    if (options.keep_surfaces) std::copy(next.begin(), next.end(), sol.phi.slice(N).begin());

    // Initial policy: argmax of the conjugate on the terminal data.
    std::vector<double> policy(S, cost.v_bar);
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
        const std::size_t n = grid.row_size(r);
        std::span<const double> u(next.data() + grid.row_offset[r], n);
        for (std::size_t k = 1; k + 1 < n; ++k)
            policy[grid.row_offset[r] + k] = conjugate(cost, detail::conjugate_argument(u, k, dx)).beta_star;
    }

    detail::RowStepper stepper;
    std::vector<double> work;
    std::vector<double> trial_beta;
    std::vector<double> row_cost;

    for (std::size_t n = N; n-- > 0;) {
        const double dt = grid.time.dt(n);
        std::size_t step_iters = 0;
        double step_change = 0.0;
        double step_residual = 0.0;

        for (std::size_t r : grid.solve_order) {
            const auto& row = grid.rows[r];
            const std::size_t off = grid.row_offset[r];
            const std::size_t len = grid.row_size(r);
            std::span<double> beta(policy.data() + off, len);
            std::span<const double> u_next(next.data() + off, len);
            std::span<double> u(cur.data() + off, len);

            // Transition node takes the linked row's value and control;
            // far-field nodes carry no generator (beta = v_bar, G*(0) = 0).
            const double left = row.link ? cur[grid.index(*row.link, row.lo)] : u_next[0];
            beta[0] = row.link ? policy[grid.index(*row.link, row.lo)] : cost.v_bar;
            beta[len - 1] = cost.v_bar;

            work.resize(len);
            trial_beta.resize(len);
            row_cost.resize(len);
            std::size_t iter = 0;
            double change = 0.0;
            double residual = 0.0;
            for (;;) {
                ++iter;
                stepper.assemble(beta, dt, dx);
                work[0] = left;
                work[len - 1] = u_next[len - 1];
                for (std::size_t k = 1; k + 1 < len; ++k) {
                    row_cost[k] = penalty(cost, beta[k]);
                    work[k] = u_next[k] - dt * row_cost[k];
                }
                stepper.solve(work);

                change = 0.0;
                residual = 0.0;
                for (std::size_t k = 1; k + 1 < len; ++k) {
                    if (!std::isfinite(work[k]))
                        throw SolverError("non-finite value in dual sweep", n, work[k]);
                    const double z = detail::conjugate_argument(work, k, dx);
                    const Conjugate g = conjugate(cost, z, beta[k]);
                    trial_beta[k] = g.beta_star;
                    change = std::max(change, std::abs(g.beta_star - beta[k]));
                    residual = std::max(residual, std::abs(g.value - (beta[k] * z - row_cost[k])));
                }
                if (change < tol) break;
                if (iter >= options.max_policy_iters)
                    throw SolverError("policy iteration did not converge", n, change);
                for (std::size_t k = 1; k + 1 < len; ++k) beta[k] = trial_beta[k];
            }
            std::copy(work.begin(), work.end(), u.begin());
            step_iters = std::max(step_iters, iter);
            step_change = std::max(step_change, change);
            step_residual = std::max(step_residual, residual);

            // Linear solves under the accepted control, same factorisation.
            row_cost[0] = 0.0;
            row_cost[len - 1] = 0.0;
            for (std::size_t c = 0; c < n_tan; ++c) {
                const bool is_cost = c == m;
                const auto& tn = tan_next[c];
                auto& tc = tan_cur[c];
                work[0] = row.link ? tc[grid.index(*row.link, row.lo)] : tn[off];
                work[len - 1] = tn[off + len - 1];
                for (std::size_t k = 1; k + 1 < len; ++k)
                    work[k] = tn[off + k] + (is_cost ? dt * row_cost[k] : 0.0);
                stepper.solve(work);
                std::copy(work.begin(), work.end(), tc.begin() + static_cast<std::ptrdiff_t>(off));
            }
        }

        for (std::size_t i : by_knot[n]) {
            for (std::size_t k = 0; k < S; ++k) cur[k] -= lambda[i] * payoff(i)[k];
            if (n_tan)
                for (std::size_t k = 0; k < S; ++k) tan_cur[i][k] += payoff(i)[k];
        }
        if (!by_knot[n].empty()) {
            apply_row_links(grid, cur);
            for (auto& t : tan_cur) apply_row_links(grid, t);
        }

        sol.policy_iters[n] = step_iters;
        sol.policy_change[n] = step_change;
        sol.hjb_residual[n] = step_residual;
        if (options.keep_surfaces) {
            std::copy(cur.begin(), cur.end(), sol.phi.slice(n).begin());
            std::copy(policy.begin(), policy.end(), sol.beta.slice(n).begin());
        }
        std::swap(cur, next);
        std::swap(tan_cur, tan_next);
    }

    sol.initial_value = next[grid.initial_index()];
    if (n_tan) {
        DualTangents t;
        t.prices.resize(m);
        for (std::size_t i = 0; i < m; ++i) t.prices[i] = tan_next[i][grid.initial_index()];
        t.primal_cost = tan_next[m][grid.initial_index()];
        sol.tangents = std::move(t);
    }
    return sol;
}

Surface extract_vol(const DualSolution& solution) {
    Surface sigma = solution.beta;
    for (double& v : sigma.values()) v = std::sqrt(v);
    return sigma;
}

}  // namespace voltran
