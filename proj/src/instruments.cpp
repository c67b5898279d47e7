#include "voltran/instruments.hpp"

#include "voltran/errors.hpp"

#include <algorithm>
#include <cmath>

namespace voltran {

namespace {

constexpr double kTimeTol = 1e-12;

struct KindName {
    InstrumentKind kind;
    std::string_view name;
};

constexpr KindName kKinds[] = {
    {InstrumentKind::european_put, "european_put"},
    {InstrumentKind::european_call, "european_call"},
    {InstrumentKind::barrier_down_out_put, "barrier_down_out_put"},
    {InstrumentKind::barrier_down_in_put, "barrier_down_in_put"},
    {InstrumentKind::lookback_fixed_strike_put, "lookback_fixed_strike_put"},
};

}  // namespace

std::string_view to_string(InstrumentKind kind) {
    for (const auto& k : kKinds)
        if (k.kind == kind) return k.name;
    return "unknown";
}

InstrumentKind parse_instrument_kind(std::string_view name) {
    for (const auto& k : kKinds)
        if (k.name == name) return k.kind;
    throw ConfigError("kind", "unknown instrument kind '" + std::string(name) + "'");
}

bool is_barrier(InstrumentKind kind) {
    return kind == InstrumentKind::barrier_down_out_put || kind == InstrumentKind::barrier_down_in_put;
}

void validate_instrument(const Instrument& inst, double spot) {
    const std::string prefix = "instrument '" + inst.id + "'.";
    if (inst.id.empty()) throw ConfigError("instrument.id", "must be non-empty");
    if (!(inst.strike > 0.0) || !std::isfinite(inst.strike))
        throw ConfigError(prefix + "strike", "must be positive");
    if (!(inst.maturity > 0.0) || inst.maturity > 1.0 + kTimeTol)
        throw ConfigError(prefix + "maturity", "must lie in (0, 1]");
    if (!(inst.target_price >= 0.0) || !std::isfinite(inst.target_price))
        throw ConfigError(prefix + "target_price", "must be non-negative");
    if (!(inst.weight > 0.0) || !std::isfinite(inst.weight))
        throw ConfigError(prefix + "weight", "must be positive");
    if (is_barrier(inst.kind)) {
        if (!inst.barrier) throw ConfigError(prefix + "barrier", "required for barrier kinds");
        if (!(*inst.barrier > 0.0)) throw ConfigError(prefix + "barrier", "must be positive");
    }

    // Static no-arbitrage bounds under zero rates.
    const double K = inst.strike;
    double lo = 0.0;
    double hi = K;
    switch (inst.kind) {
    case InstrumentKind::european_put:
    case InstrumentKind::lookback_fixed_strike_put:
        lo = std::max(K - spot, 0.0);
        break;
    case InstrumentKind::european_call:
        lo = std::max(spot - K, 0.0);
        hi = spot;
        break;
    case InstrumentKind::barrier_down_out_put:
    case InstrumentKind::barrier_down_in_put:
        break;
    }
    if (inst.target_price < lo - 1e-14 || inst.target_price > hi + 1e-14)
        throw ConfigError(prefix + "target_price",
                          "violates arbitrage bounds [" + std::to_string(lo) + ", "
                              + std::to_string(hi) + "]");
}

std::vector<Instrument> to_bounded_payoffs(const std::vector<Instrument>& instruments, double spot) {
    std::vector<Instrument> out = instruments;
    for (auto& inst : out) {
        if (inst.kind != InstrumentKind::european_call) continue;
        inst.kind = InstrumentKind::european_put;
        inst.target_price = inst.target_price - (spot - inst.strike);
        inst.from_call = true;
    }
    return out;
}

double quoted_price(const Instrument& inst, double solver_price, double spot) {
    if (inst.from_call || inst.kind == InstrumentKind::european_call)
        return solver_price + (spot - inst.strike);
    return solver_price;
}

std::string_view to_string(StateSpaceKind::Tag tag) {
    switch (tag) {
    case StateSpaceKind::Tag::euro: return "euro";
    case StateSpaceKind::Tag::barrier: return "barrier";
    case StateSpaceKind::Tag::lookback: return "lookback";
    }
    return "unknown";
}

StateSpaceKind::Tag parse_state_space(std::string_view name) {
    if (name == "euro") return StateSpaceKind::Tag::euro;
    if (name == "barrier") return StateSpaceKind::Tag::barrier;
    if (name == "lookback") return StateSpaceKind::Tag::lookback;
    throw ConfigError("grid.state_space", "unknown state space '" + std::string(name) + "'");
}

StateSpaceKind required_state(const std::vector<Instrument>& instruments, double spot) {
    if (instruments.empty()) throw ConfigError("instruments", "at least one instrument is required");
    StateSpaceKind kind;
    const double x0 = std::log(spot);
    for (const auto& inst : instruments) {
        if (is_barrier(inst.kind)) {
            if (!inst.barrier) throw ConfigError("instrument '" + inst.id + "'.barrier", "missing");
            const double level = std::log(*inst.barrier);
            if (!(level < x0))
                throw UnsupportedFeature("instrument '" + inst.id
                                         + "': only lower barriers (B < S0) are supported");
            kind.levels.push_back(level);
            kind.tag = std::max(kind.tag, StateSpaceKind::Tag::barrier);
        } else if (inst.kind == InstrumentKind::lookback_fixed_strike_put) {
            kind.tag = StateSpaceKind::Tag::lookback;
        }
    }
    std::sort(kind.levels.begin(), kind.levels.end());
    kind.levels.erase(std::unique(kind.levels.begin(), kind.levels.end()), kind.levels.end());
    return kind;
}

double payoff(const Instrument& inst, double x, const PathState& state) {
    const double K = inst.strike;
    const double put = std::max(K - std::exp(x), 0.0);
    switch (inst.kind) {
    case InstrumentKind::european_put: return put;
    case InstrumentKind::european_call: return std::max(std::exp(x) - K, 0.0);
    case InstrumentKind::barrier_down_out_put:
    case InstrumentKind::barrier_down_in_put: {
        bool hit = false;
        if (const auto* b = std::get_if<BarrierState>(&state)) {
            hit = b->hit;
        } else if (const auto* m = std::get_if<RunningMinState>(&state)) {
            hit = m->y <= std::log(*inst.barrier);
        } else {
            throw ContractViolation("payoff: barrier instrument '" + inst.id + "' needs a path state");
        }
        const bool pays = inst.kind == InstrumentKind::barrier_down_in_put ? hit : !hit;
        return pays ? put : 0.0;
    }
    case InstrumentKind::lookback_fixed_strike_put: {
        const auto* m = std::get_if<RunningMinState>(&state);
        if (!m) throw ContractViolation("payoff: lookback instrument '" + inst.id + "' needs a running minimum");
        if (m->y > x + 1e-12) throw ContractViolation("payoff: running minimum above spot");
        return std::max(K - std::exp(m->y), 0.0);
    }
    }
    return 0.0;
}

std::vector<double> jump_times(const std::vector<Instrument>& instruments) {
    std::vector<double> t;
    t.reserve(instruments.size());
    for (const auto& inst : instruments) t.push_back(inst.maturity);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) <= kTimeTol; }),
            t.end());
    return t;
}

}  // namespace voltran
