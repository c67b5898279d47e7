#pragma once

#include "voltran/instruments.hpp"

#include <optional>
#include <string>

namespace testing {

inline voltran::Instrument make(std::string id, voltran::InstrumentKind kind, double strike, double maturity,
                                std::optional<double> barrier = std::nullopt, double target = 0.0) {
    voltran::Instrument inst;
    inst.id = std::move(id);
    inst.kind = kind;
    inst.strike = strike;
    inst.maturity = maturity;
    inst.barrier = barrier;
    inst.target_price = target;
    return inst;
}

inline voltran::Instrument put(std::string id, double strike, double maturity, double target = 0.0) {
    return make(std::move(id), voltran::InstrumentKind::european_put, strike, maturity, std::nullopt, target);
}

}  // namespace testing
