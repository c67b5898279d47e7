#include "stencil.hpp"

#include "voltran/errors.hpp"

namespace voltran::detail {

void RowStepper::assemble(std::span<const double> beta, double dt, double dx) {
    n_ = beta.size();
    if (n_ < 3) throw ContractViolation("row too short for the implicit stencil");
    lower_.assign(n_, 0.0);
    upper_.assign(n_, 0.0);
    diag_.assign(n_, 1.0);
    const double c2 = 0.5 / (dx * dx);
    const double c1 = 0.25 / dx;
    for (std::size_t k = 1; k + 1 < n_; ++k) {
        const double l = beta[k] * (c2 + c1);
        const double r = beta[k] * (c2 - c1);
        lower_[k] = -dt * l;
        upper_[k] = -dt * r;
        diag_[k] = 1.0 + dt * (l + r);
    }
    factor();
}

void RowStepper::assemble(std::span<const double> beta, std::span<const double> drift, double dt, double dx) {
    n_ = beta.size();
    if (n_ < 3 || drift.size() != n_) throw ContractViolation("row fields do not match");
    lower_.assign(n_, 0.0);
    upper_.assign(n_, 0.0);
    diag_.assign(n_, 1.0);
    const double c2 = 0.5 / (dx * dx);
    for (std::size_t k = 1; k + 1 < n_; ++k) {
        const double diff = beta[k] * c2;
        const double adv = drift[k] / (2.0 * dx);
        double l = diff - adv;
        double r = diff + adv;
        if (l < 0.0 || r < 0.0) {
            l = diff + (drift[k] < 0.0 ? -drift[k] / dx : 0.0);
            r = diff + (drift[k] > 0.0 ? drift[k] / dx : 0.0);
        }
        lower_[k] = -dt * l;
        upper_[k] = -dt * r;
        diag_[k] = 1.0 + dt * (l + r);
    }
    factor();
}

void RowStepper::factor() {
    cprime_.assign(n_, 0.0);
    inv_.assign(n_, 0.0);
    double prev = 0.0;
    for (std::size_t k = 1; k + 1 < n_; ++k) {
        const double a = k > 1 ? lower_[k] : 0.0;
        const double inv = 1.0 / (diag_[k] - a * prev);
        inv_[k] = inv;
        prev = upper_[k] * inv;
        cprime_[k] = prev;
    }
}

void RowStepper::solve(std::span<double> u) const {
    if (u.size() != n_) throw ContractViolation("row vector size mismatch");
    const std::size_t last = n_ - 2;
    u[1] -= lower_[1] * u[0];
    u[last] -= upper_[last] * u[n_ - 1];
    double prev = 0.0;
    for (std::size_t k = 1; k <= last; ++k) {
        const double a = k > 1 ? lower_[k] : 0.0;
        prev = (u[k] - a * prev) * inv_[k];
        u[k] = prev;
    }
    for (std::size_t k = last; k-- > 1;) u[k] -= cprime_[k] * u[k + 1];
}

}  // namespace voltran::detail
