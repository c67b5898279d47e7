#pragma once

#include <optional>

namespace voltran {

// ============================================================================
// Convex penalty on the diffusion characteristic
// ============================================================================
//
// The cost lives on the martingale line alpha = -beta/2 of log-spot:
//
//     F(beta) = a (beta/v)^p + b (beta/v)^(-q) + c,      v = sigma_bar^2
//
// with b = a p / q and c = -(a + b) so that F(v) = F'(v) = 0. Outside the
// band [beta_min, beta_max] the cost is +infinity, which makes the conjugate
// a clamped Legendre transform.

struct CostSpec {
    double sigma_bar = 0.0;
    double v_bar = 0.0;
    double p_exp = 2.0;
    double q_exp = 2.0;
    double a = 1.0;
    double b = 1.0;
    double c = -2.0;
    double beta_min = 0.0;
    double beta_max = 0.0;
    double slope_at_min = 0.0;  // F'(beta_min)
    double slope_at_max = 0.0;  // F'(beta_max)
};

/// User-facing cost parameters. Unset band limits default to
/// [0.01 v_bar, 9 v_bar].
struct CostParams {
    double sigma_bar = 0.2;
    double p_exp = 2.0;
    double q_exp = 2.0;
    double a = 1.0;
    std::optional<double> beta_min;
    std::optional<double> beta_max;
};

[[nodiscard]] CostSpec make_cost_spec(double sigma_bar, double p_exp, double q_exp, double a,
                                      double beta_min, double beta_max);
[[nodiscard]] CostSpec make_cost_spec(const CostParams& params);

/// F(beta). Throws DomainError for beta <= 0.
[[nodiscard]] double penalty(const CostSpec& spec, double beta);
/// F'(beta), beta > 0.
[[nodiscard]] double penalty_slope(const CostSpec& spec, double beta);
/// F''(beta), beta > 0.
[[nodiscard]] double penalty_curvature(const CostSpec& spec, double beta);

struct Conjugate {
    double value = 0.0;      // G*(z) = sup_beta beta z - F(beta)
    double beta_star = 0.0;  // maximiser, clamped to the band
};

/// Restricted conjugate over [beta_min, beta_max], Newton started at v_bar.
[[nodiscard]] Conjugate conjugate(const CostSpec& spec, double z);
/// Same, with a caller-supplied starting point (used for warm starts in the
/// PDE sweeps where neighbouring calls have close arguments).
[[nodiscard]] Conjugate conjugate(const CostSpec& spec, double z, double beta_guess);

struct Hamiltonian {
    double value = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// H*(p, q) on the martingale line, i.e. G*(q - p/2), together with its
/// gradient (alpha, beta) = (-beta*/2, beta*).
[[nodiscard]] Hamiltonian hstar(const CostSpec& spec, double p_grad, double q_half_hess);

}  // namespace voltran
