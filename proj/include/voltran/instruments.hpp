#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace voltran {

enum class InstrumentKind {
    european_put,
    european_call,
    barrier_down_out_put,
    barrier_down_in_put,
    lookback_fixed_strike_put,
};

[[nodiscard]] std::string_view to_string(InstrumentKind kind);
/// Throws ConfigError naming the kind when it is not recognised.
[[nodiscard]] InstrumentKind parse_instrument_kind(std::string_view name);
[[nodiscard]] bool is_barrier(InstrumentKind kind);

/// One calibration target. Prices and strikes are in spot units, maturities
/// in year fractions.
struct Instrument {
    std::string id;
    InstrumentKind kind = InstrumentKind::european_put;
    double strike = 1.0;
    std::optional<double> barrier;
    double maturity = 1.0;
    double target_price = 0.0;
    double weight = 1.0;
    /// Set on puts produced from calls by `to_bounded_payoffs`.
    bool from_call = false;
};

/// Throws ConfigError (field prefixed with the instrument id) on any
/// violated field constraint, including the static no-arbitrage bounds.
void validate_instrument(const Instrument& inst, double spot);

/// Replaces every call by the put with the same strike and maturity, with the
/// target shifted by put-call parity under zero rates: put = call - (S0 - K).
[[nodiscard]] std::vector<Instrument> to_bounded_payoffs(const std::vector<Instrument>& instruments,
                                                         double spot);

/// Converts a model price of a (possibly converted) instrument back to the
/// quote convention of the original instrument.
[[nodiscard]] double quoted_price(const Instrument& inst, double solver_price, double spot);

// ============================================================================
// Reduced state space
// ============================================================================

struct StateSpaceKind {
    enum class Tag { euro = 0, barrier = 1, lookback = 2 };
    Tag tag = Tag::euro;
    /// Strictly increasing log-barrier levels, all below log S0. Populated for
    /// both barrier and lookback spaces.
    std::vector<double> levels;

    friend bool operator==(const StateSpaceKind&, const StateSpaceKind&) = default;
};

[[nodiscard]] std::string_view to_string(StateSpaceKind::Tag tag);
[[nodiscard]] StateSpaceKind::Tag parse_state_space(std::string_view name);

/// Smallest state space (euro < barrier < lookback) supporting every
/// instrument. Throws ConfigError on an empty list and UnsupportedFeature for
/// barriers at or above spot.
[[nodiscard]] StateSpaceKind required_state(const std::vector<Instrument>& instruments, double spot);

// Path state seen by a payoff at maturity.
struct NoPathState {};
struct BarrierState {
    bool hit = false;
};
struct RunningMinState {
    double y = 0.0;  // log running minimum, y <= x
};
using PathState = std::variant<NoPathState, BarrierState, RunningMinState>;

/// Payoff in spot units at log-spot x. Throws ContractViolation when the
/// state cannot answer the instrument's path question.
[[nodiscard]] double payoff(const Instrument& inst, double x, const PathState& state);

/// Sorted distinct maturities.
[[nodiscard]] std::vector<double> jump_times(const std::vector<Instrument>& instruments);

}  // namespace voltran
