#pragma once

#include "voltran/instruments.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace voltran {

struct GridConfig {
    std::size_t n_x = 201;
    std::size_t n_t = 100;
    double x_margin_sigmas = 4.0;
    double dt_max = 0.05;
    /// Optional explicit log-spot bounds; they must contain the strikes and
    /// barriers with the configured margin.
    std::optional<double> x_min;
    std::optional<double> x_max;
    /// Force a richer state space than the instruments need.
    std::optional<StateSpaceKind::Tag> state_space;
};

struct TimeGrid {
    std::vector<double> knots;              // 0 = t_0 < ... < t_N = horizon
    std::vector<double> maturities;         // jump times
    std::vector<std::size_t> maturity_knots;

    [[nodiscard]] std::size_t steps() const { return knots.size() - 1; }
    [[nodiscard]] double dt(std::size_t n) const { return knots[n + 1] - knots[n]; }
    [[nodiscard]] double horizon() const { return knots.back(); }
    /// Knot index of a maturity; throws ContractViolation if it is not a knot.
    [[nodiscard]] std::size_t knot_of(double maturity) const;
};

/// Uniform log-spot axis with log S0 on a node.
struct SpotGrid {
    double x_min = 0.0;
    double dx = 0.0;
    std::size_t n_x = 0;
    std::size_t spot_node = 0;

    [[nodiscard]] double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
    [[nodiscard]] double x_max() const { return x(n_x - 1); }
};

/// One x-line of the reduced state space: a barrier sheet or a running
/// minimum row. Nodes lo..n_x-1 belong to the row. When `link` is set, node
/// lo is a transition node whose value is taken from row `link` at the same
/// node (barrier Dirichlet coupling, or the lookback diagonal condition);
/// otherwise node lo is a far-field node.
struct GridRow {
    std::size_t lo = 0;
    std::optional<std::size_t> link;
    double label = 0.0;  // sheet index (barrier), y node (lookback), 0 (euro)
};

struct StateGrid {
    StateSpaceKind kind;   // levels are the node-snapped log-barriers
    TimeGrid time;
    SpotGrid spot;
    double log_spot = 0.0;
    std::vector<GridRow> rows;
    std::vector<std::size_t> solve_order;  // every row after its link
    std::size_t initial_row = 0;
    std::vector<double> raw_levels;        // log-barriers before snapping
    std::vector<std::size_t> level_nodes;
    std::vector<double> snap_distance;     // snapped - raw, per level
    std::vector<std::size_t> row_offset;   // layout of one time slice
    std::size_t slice_size = 0;

    [[nodiscard]] std::size_t row_size(std::size_t r) const { return spot.n_x - rows[r].lo; }
    [[nodiscard]] std::size_t index(std::size_t r, std::size_t i) const {
        return row_offset[r] + (i - rows[r].lo);
    }
    [[nodiscard]] std::size_t initial_index() const { return index(initial_row, spot.spot_node); }
};

/// Builds the grid for the given instruments. `sigma_bar` sets the spot
/// margin (x_margin_sigmas * sigma_bar * sqrt(horizon)). Throws ConfigError
/// for an invalid configuration.
[[nodiscard]] StateGrid build_grid(const GridConfig& config, const std::vector<Instrument>& instruments,
                                   double spot, double sigma_bar);

/// Index of the snapped level that represents a raw (unsnapped) barrier.
[[nodiscard]] std::size_t level_index(const StateGrid& grid, double barrier);
/// Whether the paths carried by `row` have touched level `level`.
[[nodiscard]] bool barrier_hit(const StateGrid& grid, std::size_t row, std::size_t level);
/// Representative log running minimum of a lookback row. Row r carries the
/// paths whose running minimum lies in (y_r, y_r + dx]; the midpoint is used.
[[nodiscard]] double running_min_representative(const StateGrid& grid, std::size_t row);
/// Row carrying paths with log running minimum `m` (MC lookup).
[[nodiscard]] std::size_t row_for_running_min(const StateGrid& grid, double m);
/// Path state for evaluating an instrument's payoff on row `row` at node `i`.
[[nodiscard]] PathState path_state(const StateGrid& grid, std::size_t row, std::size_t i,
                                   const Instrument& inst);

/// Payoff of `inst` on every node of one time slice. Transition nodes carry
/// the value of their source row.
[[nodiscard]] std::vector<double> payoff_slice(const StateGrid& grid, const Instrument& inst);

// ============================================================================
// Surface
// ============================================================================

/// Values on (time index, row, x node), stored row by row per time slice.
class Surface {
public:
    Surface() = default;
    Surface(const StateGrid& grid, std::size_t n_times, double fill = 0.0);

    [[nodiscard]] std::size_t n_times() const { return n_times_; }
    [[nodiscard]] std::size_t slice_size() const { return slice_size_; }

    [[nodiscard]] std::span<double> slice(std::size_t t) {
        return {data_.data() + t * slice_size_, slice_size_};
    }
    [[nodiscard]] std::span<const double> slice(std::size_t t) const {
        return {data_.data() + t * slice_size_, slice_size_};
    }
    [[nodiscard]] double at(std::size_t t, std::size_t flat) const { return data_[t * slice_size_ + flat]; }
    [[nodiscard]] double& at(std::size_t t, std::size_t flat) { return data_[t * slice_size_ + flat]; }

    [[nodiscard]] const std::vector<double>& values() const { return data_; }
    [[nodiscard]] std::vector<double>& values() { return data_; }

private:
    std::size_t n_times_ = 0;
    std::size_t slice_size_ = 0;
    std::vector<double> data_;
};

/// Copies every linked row's transition node from its source row, in solve
/// order.
void apply_row_links(const StateGrid& grid, std::span<double> slice);

/// Lookback diagonal condition d/dy phi = 0 at x = y, first order: the
/// diagonal node of row y_j takes the value of row y_{j-1} at the same x.
void apply_lookback_boundary(const StateGrid& grid, std::span<double> slice);

/// Barrier coupling phi_k = phi_{k+1} on the active barrier of sheet k.
void couple_barrier_sheets(const StateGrid& grid, std::span<double> slice);

/// Writes "t,sheet_or_y,x,value" rows (t outer, 17 significant digits).
/// With `extend`, nodes outside a row's domain are filled for plotting and
/// flagged in an extra "extended" column: barrier sheets copy the next
/// sheet, lookback rows copy sigma(t, x, x).
void write_surface_csv(std::ostream& os, const StateGrid& grid, const Surface& surface,
                       std::span<const double> times, bool extend);

}  // namespace voltran
