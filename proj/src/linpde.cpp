#include "voltran/linpde.hpp"

#include "stencil.hpp"
#include "voltran/errors.hpp"
#include "voltran/parallel.hpp"

#include <algorithm>

namespace voltran {

namespace {

struct Column {
    std::vector<const LinearProblem::Jump*> jumps;
};

void check_field(const Surface* field, const StateGrid& grid, const char* name) {
    if (!field) return;
    if (field->n_times() != grid.time.steps() || field->slice_size() != grid.slice_size)
        throw ContractViolation(std::string("solve_linear: ") + name + " field does not match the grid");
}

// Backward sweep for several terminal/jump sets sharing one set of fields.
// Every column sees exactly the same arithmetic as a single-column sweep.
std::vector<double> sweep(const StateGrid& grid, const Surface& beta, const Surface* drift, const Surface* source,
                          const std::vector<Column>& columns, Surface* keep) {
    const std::size_t N = grid.time.steps();
    const std::size_t S = grid.slice_size;
    const std::size_t nc = columns.size();
    const double dx = grid.spot.dx;

    std::vector<std::vector<double>> next(nc, std::vector<double>(S, 0.0));
    std::vector<std::vector<double>> cur(nc, std::vector<double>(S, 0.0));

    auto apply_jumps = [&](std::size_t knot, std::vector<std::vector<double>>& values) {
        for (std::size_t c = 0; c < nc; ++c) {
            bool any = false;
            for (const auto* j : columns[c].jumps) {
                if (j->knot != knot) continue;
                for (std::size_t k = 0; k < S; ++k) values[c][k] += j->values[k];
                any = true;
            }
            if (any) apply_row_links(grid, values[c]);
        }
    };

    apply_jumps(N, next);
    if (keep) std::copy(next[0].begin(), next[0].end(), keep->slice(N).begin());

    detail::RowStepper stepper;
    std::vector<double> work;
    for (std::size_t n = N; n-- > 0;) {
        const double dt = grid.time.dt(n);
        const auto beta_n = beta.slice(n);
        for (std::size_t r : grid.solve_order) {
            const auto& row = grid.rows[r];
            const std::size_t off = grid.row_offset[r];
            const std::size_t len = grid.row_size(r);
            std::span<const double> b(beta_n.data() + off, len);
            if (drift)
                stepper.assemble(b, std::span<const double>(drift->slice(n).data() + off, len), dt, dx);
            else
                stepper.assemble(b, dt, dx);
            const double* f = source ? source->slice(n).data() + off : nullptr;
            work.resize(len);
            for (std::size_t c = 0; c < nc; ++c) {
                const auto& un = next[c];
                auto& uc = cur[c];
                work[0] = row.link ? uc[grid.index(*row.link, row.lo)] : un[off] + (f ? dt * f[0] : 0.0);
                work[len - 1] = un[off + len - 1] + (f ? dt * f[len - 1] : 0.0);
                for (std::size_t k = 1; k + 1 < len; ++k) work[k] = un[off + k] + (f ? dt * f[k] : 0.0);
                stepper.solve(work);
                std::copy(work.begin(), work.end(), uc.begin() + static_cast<std::ptrdiff_t>(off));
            }
        }
        apply_jumps(n, cur);
        if (keep) std::copy(cur[0].begin(), cur[0].end(), keep->slice(n).begin());
        std::swap(cur, next);
    }

    std::vector<double> out(nc);
    for (std::size_t c = 0; c < nc; ++c) out[c] = next[c][grid.initial_index()];
    return out;
}

}  // namespace

LinearSolution solve_linear(const LinearProblem& problem) {
    if (!problem.grid || !problem.beta) throw ContractViolation("solve_linear: grid and beta are required");
    const StateGrid& grid = *problem.grid;
    check_field(problem.beta, grid, "beta");
    check_field(problem.drift, grid, "drift");
    check_field(problem.source, grid, "source");
    Column col;
    for (const auto& j : problem.jumps) {
        if (j.knot > grid.time.steps() || j.values.size() != grid.slice_size)
            throw ContractViolation("solve_linear: jump does not match the grid");
        col.jumps.push_back(&j);
    }
    LinearSolution sol;
    sol.values = Surface(grid, grid.time.steps() + 1);
    sol.initial_value = sweep(grid, *problem.beta, problem.drift, problem.source, {col}, &sol.values)[0];
    return sol;
}

std::vector<double> model_prices(const DualSolution& dual, const std::vector<Instrument>& instruments,
                                 const StateGrid& grid, std::size_t threads) {
    check_field(&dual.beta, grid, "beta");
    std::vector<LinearProblem::Jump> jumps;
    jumps.reserve(instruments.size());
    for (const auto& inst : instruments) jumps.push_back({grid.time.knot_of(inst.maturity), payoff_slice(grid, inst)});

    std::vector<double> prices(instruments.size());
    parallel_chunks(instruments.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Column> cols(end - begin);
        for (std::size_t i = begin; i < end; ++i) cols[i - begin].jumps = {&jumps[i]};
        const auto v = sweep(grid, dual.beta, nullptr, nullptr, cols, nullptr);
        std::copy(v.begin(), v.end(), prices.begin() + static_cast<std::ptrdiff_t>(begin));
    });
    return prices;
}

double primal_cost(const DualSolution& dual, const CostSpec& cost, const StateGrid& grid) {
    check_field(&dual.beta, grid, "beta");
    Surface source = dual.beta;
    for (double& v : source.values()) v = penalty(cost, v);
    return sweep(grid, dual.beta, nullptr, &source, {Column{}}, nullptr)[0];
}

}  // namespace voltran
