#include "voltran/calibrate.hpp"

#include "voltran/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace voltran {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double weighted_error(const std::vector<Instrument>& instruments, std::span<const double> errors) {
    double e = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) e = std::max(e, instruments[i].weight * std::abs(errors[i]));
    return e;
}

DualOptions sweep_options(const OptimizerConfig& config) {
    DualOptions o;
    o.tol_policy = config.policy_tol;
    o.max_policy_iters = config.policy_max_iters;
    o.keep_surfaces = false;
    o.with_tangents = true;
    return o;
}

// Dense inverse-Hessian approximation for f = -objective.
class InverseHessian {
public:
    explicit InverseHessian(std::size_t m) : m_(m), h_(m * m, 0.0) {}

    void reset(double scale) {
        std::fill(h_.begin(), h_.end(), 0.0);
        for (std::size_t i = 0; i < m_; ++i) h_[i * m_ + i] = scale;
        fresh_ = true;
    }

    // s = x_{k+1} - x_k, y = grad f_{k+1} - grad f_k.
    void update(std::span<const double> s, std::span<const double> y) {
        const double sy = dot(s, y);
        if (!(sy > 1e-300)) return;
        if (fresh_) {
            reset(sy / dot(y, y));
            fresh_ = false;
        }
        const double rho = 1.0 / sy;
        std::vector<double> hy(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j) hy[i] += h_[i * m_ + j] * y[j];
        const double yhy = dot(y, hy);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                h_[i * m_ + j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
    }

    [[nodiscard]] std::vector<double> apply(std::span<const double> g) const {
        std::vector<double> out(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j) out[i] += h_[i * m_ + j] * g[j];
        return out;
    }

private:
    std::size_t m_;
    std::vector<double> h_;
    bool fresh_ = true;
};

}  // namespace

ObjectiveValue objective(std::span<const double> lambda, const CostSpec& cost,
                         const std::vector<Instrument>& instruments, const StateGrid& grid,
                         const DualOptions& options) {
    DualOptions o = options;
    o.with_tangents = true;
    const DualSolution sol = solve_dual(cost, instruments, lambda, grid, o);
    ObjectiveValue out;
    out.phi0 = sol.initial_value;
    out.prices = sol.tangents->prices;
    out.primal_cost = sol.tangents->primal_cost;
    out.gradient.resize(instruments.size());
    double lc = 0.0;
    for (std::size_t i = 0; i < instruments.size(); ++i) {
        lc += lambda[i] * instruments[i].target_price;
        out.gradient[i] = out.prices[i] - instruments[i].target_price;
    }
    out.value = (0.0 - lc) - out.phi0;
    return out;
}

CalibrationReport calibrate(const std::vector<Instrument>& instruments, const CostSpec& cost,
                            const StateGrid& grid, const OptimizerConfig& config) {
    if (instruments.empty()) throw ConfigError("instruments", "at least one instrument is required");
    if (!(config.tol_price > 0.0)) throw ConfigError("optimizer.tol_price", "must be positive");
    const auto& ls = config.line_search;
    if (!(ls.c1 > 0.0 && ls.c1 < 1.0)) throw ConfigError("optimizer.line_search.c1", "must lie in (0, 1)");
    if (!(ls.shrink > 0.0 && ls.shrink < 1.0))
        throw ConfigError("optimizer.line_search.shrink", "must lie in (0, 1)");
    const double spot = std::exp(grid.log_spot);
    for (const auto& inst : instruments) {
        if (inst.kind == InstrumentKind::european_call)
            throw ContractViolation("calibrate: convert calls with to_bounded_payoffs first");
        validate_instrument(inst, spot);
    }

    const std::size_t m = instruments.size();
    const DualOptions opts = sweep_options(config);
    CalibrationReport rep;
    std::vector<double> lambda(m, 0.0);
    ObjectiveValue cur = objective(lambda, cost, instruments, grid, opts);
    std::size_t evals = 1;

    InverseHessian hinv(m);
    hinv.reset(1.0);
    double step_scale = 0.0;  // first trial step; set by the curvature probe
    double last_step = 0.0;

    for (std::size_t it = 0;; ++it) {
        const double err = weighted_error(instruments, cur.gradient);
        rep.trace.push_back({it, cur.value, err, last_step, evals});
        rep.iterations = it;
        if (err < config.tol_price) {
            rep.converged = true;
            break;
        }
        if (it >= config.max_outer_iters) break;

        const std::vector<double>& g = cur.gradient;
        if (step_scale == 0.0) {
            // Secant curvature of the objective along the gradient, from one
            // probe step of unit sup-norm; gives the first trial step.
            double gmax = 0.0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            const double eps = 1.0 / gmax;
            std::vector<double> probe(m);
            for (std::size_t i = 0; i < m; ++i) probe[i] = lambda[i] + eps * g[i];
            const ObjectiveValue pv = objective(probe, cost, instruments, grid, opts);
            ++evals;
            double curv = 0.0;
            for (std::size_t i = 0; i < m; ++i) curv += (pv.gradient[i] - g[i]) * g[i];
            curv /= eps * dot(g, g);
            step_scale = curv < 0.0 ? -1.0 / curv : eps;
            hinv.reset(step_scale);
        }

        std::vector<double> dir = config.use_bfgs ? hinv.apply(g) : g;
        double slope = dot(g, dir);
        if (!(slope > 0.0)) {
            hinv.reset(step_scale);
            dir = config.use_bfgs ? hinv.apply(g) : g;
            slope = dot(g, dir);
        }
        double t = config.use_bfgs ? 1.0 : step_scale;

        std::vector<double> trial(m);
        ObjectiveValue next;
        bool accepted = false;
        for (std::size_t k = 0; k < ls.max_trials; ++k) {
            for (std::size_t i = 0; i < m; ++i) trial[i] = lambda[i] + t * dir[i];
            next = objective(trial, cost, instruments, grid, opts);
            ++evals;
            if (next.value >= cur.value + ls.c1 * t * slope) {
                accepted = true;
                break;
            }
            t *= ls.shrink;
        }
        if (!accepted) break;

        std::vector<double> s(m);
        std::vector<double> y(m);
        for (std::size_t i = 0; i < m; ++i) {
            s[i] = trial[i] - lambda[i];
            y[i] = g[i] - next.gradient[i];  // gradient of -objective
        }
        if (config.use_bfgs) {
            hinv.update(s, y);
        } else {
            const double sy = dot(s, y);
            if (sy > 0.0) step_scale = dot(s, s) / sy;  // Barzilai-Borwein
        }
        lambda = trial;
        cur = std::move(next);
        last_step = t;
    }

    rep.evaluations = evals;
    rep.lambda_star = lambda;
    rep.model_prices = cur.prices;
    rep.price_errors = cur.gradient;
    rep.dual_value = cur.value;
    rep.primal_cost = cur.primal_cost;
    rep.duality_gap = std::abs(cur.primal_cost + dot(lambda, cur.gradient) - cur.value);
    return rep;
}

CalibrationRun calibrate(const std::vector<Instrument>& instruments, const CostSpec& cost,
                         const GridConfig& grid_config, double spot, const OptimizerConfig& config) {
    if (instruments.empty()) throw ConfigError("instruments", "at least one instrument is required");
    for (const auto& inst : instruments) validate_instrument(inst, spot);
    CalibrationRun run;
    run.instruments = to_bounded_payoffs(instruments, spot);
    run.grid = build_grid(grid_config, run.instruments, spot, cost.sigma_bar);
    run.report = calibrate(run.instruments, cost, run.grid, config);
    DualOptions keep;
    keep.tol_policy = config.policy_tol;
    keep.max_policy_iters = config.policy_max_iters;
    keep.keep_surfaces = true;
    keep.with_tangents = true;
    run.solution = solve_dual(cost, run.instruments, run.report.lambda_star, run.grid, keep);
    return run;
}

}  // namespace voltran
