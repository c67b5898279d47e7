#include "voltran/statespace.hpp"

#include "voltran/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace voltran {

namespace {

TimeGrid build_time_grid(const GridConfig& config, const std::vector<double>& maturities) {
    if (!(config.dt_max > 0.0)) throw ConfigError("grid.dt_max", "must be positive");
    TimeGrid grid;
    grid.maturities = maturities;
    const double horizon = maturities.back();
    grid.knots.push_back(0.0);
    double start = 0.0;
    for (double T : maturities) {
        const double len = T - start;
        auto n = static_cast<std::size_t>(
            std::llround(static_cast<double>(config.n_t) * len / horizon));
        n = std::max<std::size_t>(n, 1);
        n = std::max(n, static_cast<std::size_t>(std::ceil(len / config.dt_max - 1e-9)));
        for (std::size_t k = 1; k < n; ++k)
            grid.knots.push_back(start + len * static_cast<double>(k) / static_cast<double>(n));
        grid.knots.push_back(T);
        grid.maturity_knots.push_back(grid.knots.size() - 1);
        start = T;
    }
    return grid;
}

}  // namespace

std::size_t TimeGrid::knot_of(double maturity) const {
    for (std::size_t k = 0; k < maturities.size(); ++k)
        if (std::abs(maturities[k] - maturity) <= 1e-12) return maturity_knots[k];
    throw ContractViolation("maturity " + std::to_string(maturity) + " is not a time-grid knot");
}

StateGrid build_grid(const GridConfig& config, const std::vector<Instrument>& instruments, double spot,
                     double sigma_bar) {
    if (config.n_x < 51) throw ConfigError("grid.n_x", "must be at least 51");
    if (config.n_t < 20) throw ConfigError("grid.n_t", "must be at least 20");
    if (!(config.x_margin_sigmas > 0.0)) throw ConfigError("grid.x_margin_sigmas", "must be positive");
    if (!(spot > 0.0)) throw ConfigError("spot", "must be positive");

    StateGrid grid;
    grid.kind = required_state(instruments, spot);
    if (config.state_space) {
        if (*config.state_space < grid.kind.tag)
            throw ConfigError("grid.state_space", "'" + std::string(to_string(*config.state_space))
                                                      + "' cannot represent the instruments; need '"
                                                      + std::string(to_string(grid.kind.tag)) + "'");
        grid.kind.tag = *config.state_space;
    }
    grid.raw_levels = grid.kind.levels;
    grid.log_spot = std::log(spot);
    grid.time = build_time_grid(config, jump_times(instruments));

    // Spot axis: cover strikes, barriers and spot with the margin.
    const double x0 = grid.log_spot;
    double lo_ref = x0;
    double hi_ref = x0;
    for (const auto& inst : instruments) {
        lo_ref = std::min(lo_ref, std::log(inst.strike));
        hi_ref = std::max(hi_ref, std::log(inst.strike));
        if (inst.barrier) lo_ref = std::min(lo_ref, std::log(*inst.barrier));
    }
    const double margin = config.x_margin_sigmas * sigma_bar * std::sqrt(grid.time.horizon());
    double x_lo = lo_ref - margin;
    double x_hi = hi_ref + margin;
    if (config.x_min) {
        if (*config.x_min > x_lo)
            throw ConfigError("grid.x_min", "domain too small to contain strikes/barriers with margin");
        x_lo = *config.x_min;
    }
    if (config.x_max) {
        if (*config.x_max < x_hi)
            throw ConfigError("grid.x_max", "domain too small to contain strikes/barriers with margin");
        x_hi = *config.x_max;
    }
    if (!(x_hi > x_lo)) throw ConfigError("grid", "empty spot domain");

    // One spare node absorbs the shift that puts log S0 on a node.
    const std::size_t n_x = config.n_x;
    const double dx = (x_hi - x_lo) / static_cast<double>(n_x - 2);
    if (!(dx < 1.0)) throw ConfigError("grid.n_x", "spot spacing too coarse");
    const auto i0 = static_cast<std::size_t>(std::ceil((x0 - x_lo) / dx - 1e-9));
    grid.spot = {x0 - static_cast<double>(i0) * dx, dx, n_x, i0};

    for (double level : grid.kind.levels) {
        const double pos = (level - grid.spot.x_min) / dx;
        const auto j = static_cast<std::size_t>(std::max(0.0, std::round(pos)));
        if (j < 1) throw ConfigError("grid", "barrier below the spot domain");
        if (j >= i0) throw ConfigError("grid.n_x", "barrier within half a cell of spot; refine the grid");
        if (!grid.level_nodes.empty() && j == grid.level_nodes.back())
            throw ConfigError("grid.n_x", "two barriers snap to the same node; refine the grid");
        grid.level_nodes.push_back(j);
        grid.snap_distance.push_back(grid.spot.x(j) - level);
    }
    for (std::size_t l = 0; l < grid.level_nodes.size(); ++l) grid.kind.levels[l] = grid.spot.x(grid.level_nodes[l]);

    switch (grid.kind.tag) {
    case StateSpaceKind::Tag::euro:
        grid.rows.push_back({0, std::nullopt, 0.0});
        grid.solve_order = {0};
        grid.initial_row = 0;
        break;
    case StateSpaceKind::Tag::barrier: {
        // Sheet k: the k highest barriers have been touched.
        const std::size_t l = grid.level_nodes.size();
        for (std::size_t k = 0; k <= l; ++k) {
            if (k < l)
                grid.rows.push_back({grid.level_nodes[l - 1 - k], k + 1, static_cast<double>(k)});
            else
                grid.rows.push_back({0, std::nullopt, static_cast<double>(k)});
        }
        for (std::size_t k = l + 1; k-- > 0;) grid.solve_order.push_back(k);
        grid.initial_row = 0;
        break;
    }
    case StateSpaceKind::Tag::lookback:
        for (std::size_t r = 0; r <= i0; ++r) {
            std::optional<std::size_t> link;
            if (r > 0) link = r - 1;
            grid.rows.push_back({r, link, grid.spot.x(r)});
            grid.solve_order.push_back(r);
        }
        grid.initial_row = i0;
        break;
    }

    grid.row_offset.resize(grid.rows.size());
    std::size_t offset = 0;
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
        grid.row_offset[r] = offset;
        offset += grid.row_size(r);
    }
    grid.slice_size = offset;
    return grid;
}

std::size_t level_index(const StateGrid& grid, double barrier) {
    const double level = std::log(barrier);
    for (std::size_t j = 0; j < grid.raw_levels.size(); ++j)
        if (std::abs(grid.raw_levels[j] - level) <= 1e-12) return j;
    throw ContractViolation("barrier " + std::to_string(barrier) + " is not part of the grid");
}

bool barrier_hit(const StateGrid& grid, std::size_t row, std::size_t level) {
    switch (grid.kind.tag) {
    case StateSpaceKind::Tag::barrier: return level + row >= grid.level_nodes.size();
    case StateSpaceKind::Tag::lookback: return row < grid.level_nodes[level];
    case StateSpaceKind::Tag::euro: break;
    }
    throw ContractViolation("barrier state requested on a European grid");
}

double running_min_representative(const StateGrid& grid, std::size_t row) {
    if (row >= grid.spot.spot_node) return grid.log_spot;
    return grid.spot.x(row) + 0.5 * grid.spot.dx;
}

std::size_t row_for_running_min(const StateGrid& grid, double m) {
    switch (grid.kind.tag) {
    case StateSpaceKind::Tag::euro: return 0;
    case StateSpaceKind::Tag::barrier: {
        std::size_t hits = 0;
        for (double level : grid.kind.levels)
            if (m <= level) ++hits;
        return hits;
    }
    case StateSpaceKind::Tag::lookback: {
        const double u = std::ceil((m - grid.spot.x_min) / grid.spot.dx - 1e-9) - 1.0;
        const double top = static_cast<double>(grid.spot.spot_node) - 1.0;
        return static_cast<std::size_t>(std::clamp(u, 0.0, top));
    }
    }
    return 0;
}

PathState path_state(const StateGrid& grid, std::size_t row, std::size_t i, const Instrument& inst) {
    if (is_barrier(inst.kind)) return BarrierState{barrier_hit(grid, row, level_index(grid, *inst.barrier))};
    if (inst.kind == InstrumentKind::lookback_fixed_strike_put) {
        if (grid.kind.tag != StateSpaceKind::Tag::lookback)
            throw ContractViolation("lookback instrument on a grid without running minimum");
        return RunningMinState{std::min(running_min_representative(grid, row), grid.spot.x(i))};
    }
    return NoPathState{};
}

std::vector<double> payoff_slice(const StateGrid& grid, const Instrument& inst) {
    std::vector<double> slice(grid.slice_size, 0.0);
    for (std::size_t r = 0; r < grid.rows.size(); ++r)
        for (std::size_t i = grid.rows[r].lo; i < grid.spot.n_x; ++i)
            slice[grid.index(r, i)] = payoff(inst, grid.spot.x(i), path_state(grid, r, i, inst));
    apply_row_links(grid, slice);
    return slice;
}

Surface::Surface(const StateGrid& grid, std::size_t n_times, double fill)
    : n_times_(n_times), slice_size_(grid.slice_size), data_(n_times * grid.slice_size, fill) {}

void apply_row_links(const StateGrid& grid, std::span<double> slice) {
    if (slice.size() != grid.slice_size) throw ContractViolation("slice does not match grid layout");
    for (std::size_t r : grid.solve_order) {
        const auto& row = grid.rows[r];
        if (!row.link) continue;
        slice[grid.index(r, row.lo)] = slice[grid.index(*row.link, row.lo)];
    }
}

void apply_lookback_boundary(const StateGrid& grid, std::span<double> slice) {
    if (grid.kind.tag != StateSpaceKind::Tag::lookback)
        throw ContractViolation("lookback boundary on a non-lookback grid");
    apply_row_links(grid, slice);
}

void couple_barrier_sheets(const StateGrid& grid, std::span<double> slice) {
    if (grid.kind.tag != StateSpaceKind::Tag::barrier)
        throw ContractViolation("barrier coupling on a non-barrier grid");
    apply_row_links(grid, slice);
}

namespace {

// Value shown at node i of row r when i lies below the row's domain.
double extended_value(const StateGrid& grid, std::span<const double> slice, std::size_t r, std::size_t i) {
    if (grid.kind.tag == StateSpaceKind::Tag::lookback) return slice[grid.index(i, i)];
    std::size_t s = r;
    while (grid.rows[s].lo > i) s = *grid.rows[s].link;
    return slice[grid.index(s, i)];
}

}  // namespace

void write_surface_csv(std::ostream& os, const StateGrid& grid, const Surface& surface,
                       std::span<const double> times, bool extend) {
    if (times.size() != surface.n_times()) throw ContractViolation("time labels do not match surface");
    os << (extend ? "t,sheet_or_y,x,value,extended\n" : "t,sheet_or_y,x,value\n");
    char buf[160];
    for (std::size_t t = 0; t < surface.n_times(); ++t) {
        const auto slice = surface.slice(t);
        for (std::size_t r = 0; r < grid.rows.size(); ++r) {
            const std::size_t first = extend ? 0 : grid.rows[r].lo;
            for (std::size_t i = first; i < grid.spot.n_x; ++i) {
                const bool outside = i < grid.rows[r].lo;
                const double v = outside ? extended_value(grid, slice, r, i) : slice[grid.index(r, i)];
                int n;
                if (extend)
                    n = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", times[t],
                                      grid.rows[r].label, grid.spot.x(i), v, outside ? 1 : 0);
                else
                    n = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", times[t],
                                      grid.rows[r].label, grid.spot.x(i), v);
                os.write(buf, n);
            }
        }
    }
}

}  // namespace voltran
