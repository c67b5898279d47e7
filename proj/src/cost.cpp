#include "voltran/cost.hpp"

#include "voltran/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace voltran {

namespace {

// Integer exponents are the common case (p = q = 2 by default) and are
// evaluated by repeated multiplication; this sits on the inner loop of every
// backward sweep.
double power(double s, double e) {
    if (e == std::floor(e) && std::abs(e) <= 8.0) {
        int n = static_cast<int>(std::abs(e));
        double r = 1.0;
        for (int k = 0; k < n; ++k) r *= s;
        return e < 0 ? 1.0 / r : r;
    }
    return std::pow(s, e);
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

CostSpec make_cost_spec(double sigma_bar, double p_exp, double q_exp, double a,
                        double beta_min, double beta_max) {
    if (!(sigma_bar > 0.0) || !std::isfinite(sigma_bar))
        throw ConfigError("cost.sigma_bar", "must be positive and finite");
    if (!(p_exp > 1.0) || !std::isfinite(p_exp)) throw ConfigError("cost.p", "must exceed 1");
    if (!(q_exp > 1.0) || !std::isfinite(q_exp)) throw ConfigError("cost.q", "must exceed 1");
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("cost.a", "must be positive");
    const double v = sigma_bar * sigma_bar;
    if (!(beta_min > 0.0) || !(beta_min < v))
        throw ConfigError("cost.beta_min", "must satisfy 0 < beta_min < sigma_bar^2");
    if (!(beta_max > v) || !std::isfinite(beta_max))
        throw ConfigError("cost.beta_max", "must satisfy beta_max > sigma_bar^2");

    CostSpec spec;
    spec.sigma_bar = sigma_bar;
    spec.v_bar = v;
    spec.p_exp = p_exp;
    spec.q_exp = q_exp;
    spec.a = a;
    spec.b = a * p_exp / q_exp;
    spec.c = -(spec.a + spec.b);
    spec.beta_min = beta_min;
    spec.beta_max = beta_max;
    spec.slope_at_min = penalty_slope(spec, beta_min);
    spec.slope_at_max = penalty_slope(spec, beta_max);
    return spec;
}

CostSpec make_cost_spec(const CostParams& params) {
    const double v = params.sigma_bar * params.sigma_bar;
    return make_cost_spec(params.sigma_bar, params.p_exp, params.q_exp, params.a,
                          params.beta_min.value_or(0.01 * v), params.beta_max.value_or(9.0 * v));
}

double penalty(const CostSpec& spec, double beta) {
    if (!(beta > 0.0)) throw DomainError("penalty: beta must be positive, got " + std::to_string(beta));
    const double s = beta / spec.v_bar;
    return spec.a * power(s, spec.p_exp) + spec.b * power(s, -spec.q_exp) + spec.c;
}

double penalty_slope(const CostSpec& spec, double beta) {
    const double s = beta / spec.v_bar;
    return (spec.a * spec.p_exp * power(s, spec.p_exp - 1.0)
            - spec.b * spec.q_exp * power(s, -spec.q_exp - 1.0)) / spec.v_bar;
}

double penalty_curvature(const CostSpec& spec, double beta) {
    const double s = beta / spec.v_bar;
    return (spec.a * spec.p_exp * (spec.p_exp - 1.0) * power(s, spec.p_exp - 2.0)
            + spec.b * spec.q_exp * (spec.q_exp + 1.0) * power(s, -spec.q_exp - 2.0))
           / (spec.v_bar * spec.v_bar);
}

Conjugate conjugate(const CostSpec& spec, double z) { return conjugate(spec, z, spec.v_bar); }

Conjugate conjugate(const CostSpec& spec, double z, double beta_guess) {
    require_finite(z, "conjugate argument");
    double beta;
    if (z <= spec.slope_at_min) {
        beta = spec.beta_min;
    } else if (z >= spec.slope_at_max) {
        beta = spec.beta_max;
    } else {
        // F' is strictly increasing on the band, so [lo, hi] always brackets
        // the root; Newton steps leaving the bracket fall back to bisection.
        double lo = spec.beta_min;
        double hi = spec.beta_max;
        beta = std::clamp(std::isfinite(beta_guess) ? beta_guess : spec.v_bar, lo, hi);
        const double tol = 1e-10 * std::max(1.0, std::abs(z));
        for (int iter = 0; iter < 200; ++iter) {
            const double g = penalty_slope(spec, beta) - z;
            if (std::abs(g) <= tol) break;
            if (g < 0.0) lo = beta; else hi = beta;
            double next = beta - g / penalty_curvature(spec, beta);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - beta) <= 1e-16 * beta) { beta = next; break; }
            beta = next;
        }
    }
    return {beta * z - penalty(spec, beta), beta};
}

Hamiltonian hstar(const CostSpec& spec, double p_grad, double q_half_hess) {
    require_finite(p_grad, "hstar gradient");
    require_finite(q_half_hess, "hstar half-hessian");
    const Conjugate g = conjugate(spec, q_half_hess - 0.5 * p_grad);
    return {g.value, -0.5 * g.beta_star, g.beta_star};
}

}  // namespace voltran
