#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace oracle {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Black-Scholes put with zero rates.
inline double bs_put(double spot, double strike, double maturity, double vol) {
    const double sd = vol * std::sqrt(maturity);
    const double d1 = (std::log(spot / strike) + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    return strike * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

inline double bs_call(double spot, double strike, double maturity, double vol) {
    return bs_put(spot, strike, maturity, vol) + spot - strike;
}

// a s^p + (a p / q) s^-q - (a + a p / q), s = beta / sigma^2
inline double penalty(double sigma_bar, double p, double q, double a, double beta) {
    const double s = beta / (sigma_bar * sigma_bar);
    const double b = a * p / q;
    return a * std::pow(s, p) + b * std::pow(s, -q) - (a + b);
}

struct Scan {
    double value = -std::numeric_limits<double>::infinity();
    double beta = 0.0;
};

// Brute-force sup of beta z - F(beta) on a uniform grid over [lo, hi].
inline Scan conjugate_scan(double sigma_bar, double p, double q, double a, double lo, double hi, double z,
                           std::size_t points = 1000000) {
    Scan best;
    for (std::size_t k = 0; k < points; ++k) {
        const double beta = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
        const double v = beta * z - penalty(sigma_bar, p, q, a, beta);
        if (v > best.value) best = {v, beta};
    }
    return best;
}

}  // namespace oracle
