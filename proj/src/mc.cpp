#include "voltran/mc.hpp"

#include "voltran/errors.hpp"
#include "voltran/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace voltran {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(path + 1))};
    return std::mt19937_64(seq);
}

// Piecewise-linear lookup along one row, clamped to the row's x-range.
double lookup(std::span<const double> slice, const StateGrid& grid, std::size_t row, double x) {
    const auto& sp = grid.spot;
    const std::size_t lo = grid.rows[row].lo;
    const double f = (x - sp.x_min) / sp.dx;
    const double lo_d = static_cast<double>(lo);
    const double hi_d = static_cast<double>(sp.n_x - 1);
    const double c = std::clamp(f, lo_d, hi_d);
    std::size_t i = static_cast<std::size_t>(c);
    if (i >= sp.n_x - 1) i = sp.n_x - 2;
    if (i < lo) i = lo;
    const double w = std::clamp(c - static_cast<double>(i), 0.0, 1.0);
    const double a = slice[grid.index(row, i)];
    if (i + 1 >= sp.n_x) return a;
    return a + w * (slice[grid.index(row, i + 1)] - a);
}

struct Sample {
    double mean = 0.0;
    double std_error = 0.0;
};

Sample summarize(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

}  // namespace

bool McResult::passes(double bound) const {
    for (const auto& e : instruments)
        if (!(std::abs(e.z_score) < bound)) return false;
    for (const auto& m : martingale)
        if (!(std::abs(m.z_score) < bound)) return false;
    return true;
}

McResult simulate_and_price(const Surface& sigma, const std::vector<Instrument>& instruments,
                            const StateGrid& grid, const McConfig& config, std::size_t threads) {
    const std::size_t steps = grid.time.steps();
    if (sigma.n_times() != steps || sigma.slice_size() != grid.slice_size)
        throw ContractViolation("simulate_and_price: sigma surface does not match the grid");
    if (config.n_paths < 2) throw ConfigError("mc.n_paths", "must be at least 2");
    if (config.antithetic && config.n_paths % 2 != 0)
        throw ConfigError("mc.n_paths", "must be even with antithetic sampling");
    const std::size_t n_steps = config.n_steps == 0 ? 4 * steps : config.n_steps;
    if (n_steps % steps != 0)
        throw ConfigError("mc.n_steps", "must be a multiple of the PDE step count " + std::to_string(steps));
    const std::size_t sub = n_steps / steps;

    const auto tag = grid.kind.tag;
    for (const auto& inst : instruments) {
        if (inst.kind == InstrumentKind::european_call)
            throw ContractViolation("simulate_and_price: calls must be converted to puts first");
        const bool needs_min = inst.kind == InstrumentKind::lookback_fixed_strike_put;
        const bool needs_flag = is_barrier(inst.kind);
        if ((needs_min && tag != StateSpaceKind::Tag::lookback) ||
            (needs_flag && tag == StateSpaceKind::Tag::euro))
            throw ContractViolation("simulate_and_price: grid state does not cover instrument " + inst.id);
        (void)grid.time.knot_of(inst.maturity);
    }

    const std::size_t m = instruments.size();
    const std::size_t n_mat = grid.time.maturities.size();
    // Instruments and martingale columns fired at each knot.
    std::vector<std::vector<std::size_t>> at_knot(steps + 1);
    std::vector<std::ptrdiff_t> mat_at_knot(steps + 1, -1);
    for (std::size_t i = 0; i < m; ++i) at_knot[grid.time.knot_of(instruments[i].maturity)].push_back(i);
    for (std::size_t k = 0; k < n_mat; ++k)
        mat_at_knot[grid.time.maturity_knots[k]] = static_cast<std::ptrdiff_t>(k);
    std::vector<std::size_t> barrier_level(m, 0);
    for (std::size_t i = 0; i < m; ++i)
        if (instruments[i].barrier) barrier_level[i] = level_index(grid, *instruments[i].barrier);

    const std::size_t n_draws = config.antithetic ? config.n_paths / 2 : config.n_paths;
    const std::size_t width = m + n_mat;
    const std::size_t per_draw = config.antithetic ? 2 : 1;
    // Per-path outputs: payoffs then exp(X_T) per maturity.
    std::vector<double> out(config.n_paths * width, 0.0);
    const double x0 = grid.log_spot;

    auto run_path = [&](std::span<const double> normals, std::span<const double> uniforms,
                        double sign, double* row_out) {
        double x = x0;
        double run_min = x0;
        std::size_t draw = 0;
        for (std::size_t n = 0; n < steps; ++n) {
            const auto slice = sigma.slice(n);
            const double h = grid.time.dt(n) / static_cast<double>(sub);
            const double sq = std::sqrt(h);
            for (std::size_t s = 0; s < sub; ++s, ++draw) {
                const std::size_t row = row_for_running_min(grid, run_min);
                const double vol = lookup(slice, grid, row, x);
                const double var = vol * vol * h;
                const double next = x - 0.5 * var + vol * sq * sign * normals[draw];
                double low = std::min(x, next);
                if (config.brownian_bridge) {
                    const double d = next - x;
                    const double u = uniforms[draw];
                    low = 0.5 * (x + next - std::sqrt(d * d - 2.0 * var * std::log(u)));
                }
                run_min = std::min(run_min, low);
                x = next;
            }
            const std::size_t knot = n + 1;
            for (std::size_t i : at_knot[knot]) {
                const Instrument& inst = instruments[i];
                PathState state = NoPathState{};
                if (is_barrier(inst.kind))
                    state = BarrierState{run_min <= grid.kind.levels[barrier_level[i]]};
                else if (inst.kind == InstrumentKind::lookback_fixed_strike_put)
                    state = RunningMinState{std::min(run_min, x)};
                row_out[i] = payoff(inst, x, state);
            }
            if (mat_at_knot[knot] >= 0) row_out[m + static_cast<std::size_t>(mat_at_knot[knot])] = std::exp(x);
        }
    };

    parallel_chunks(n_draws, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> normals(n_steps);
        std::vector<double> uniforms(n_steps);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t d = begin; d < end; ++d) {
            std::mt19937_64 rng = path_stream(config.seed, d);
            for (std::size_t k = 0; k < n_steps; ++k) normals[k] = gauss(rng);
            gauss.reset();
            for (std::size_t k = 0; k < n_steps; ++k) {
                // (0, 1]: log(u) stays finite
                uniforms[k] = 1.0 - std::generate_canonical<double, 53>(rng);
            }
            run_path(normals, uniforms, 1.0, out.data() + d * per_draw * width);
            if (config.antithetic) {
                for (auto& u : uniforms) u = std::max(1.0 - u, 1e-300);
                run_path(normals, uniforms, -1.0, out.data() + (d * 2 + 1) * width);
            }
        }
    });

    McResult res;
    res.n_paths = config.n_paths;
    res.n_steps = n_steps;
    std::vector<double> col(n_draws);
    auto column = [&](std::size_t c) {
        for (std::size_t d = 0; d < n_draws; ++d) {
            if (config.antithetic)
                col[d] = 0.5 * (out[(2 * d) * width + c] + out[(2 * d + 1) * width + c]);
            else
                col[d] = out[d * width + c];
        }
        return summarize(col);
    };
    const double spot = std::exp(x0);
    for (std::size_t i = 0; i < m; ++i) {
        const Sample s = column(i);
        McEstimate e;
        e.id = instruments[i].id;
        e.price = s.mean;
        e.std_error = s.std_error;
        e.target = instruments[i].target_price;
        e.z_score = s.std_error > 0.0 ? (s.mean - e.target) / s.std_error : (s.mean == e.target ? 0.0 : INFINITY);
        res.instruments.push_back(e);
    }
    for (std::size_t k = 0; k < n_mat; ++k) {
        const Sample s = column(m + k);
        MartingaleCheck c;
        c.maturity = grid.time.maturities[k];
        c.mean = s.mean;
        c.std_error = s.std_error;
        c.z_score = s.std_error > 0.0 ? (s.mean - spot) / s.std_error : 0.0;
        res.martingale.push_back(c);
    }
    return res;
}

}  // namespace voltran
