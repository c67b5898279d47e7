#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace voltran::detail {

/// Implicit backward step on one grid row,
///
///     u_i - dt * [ l_i (u_{i-1} - u_i) + r_i (u_{i+1} - u_i) ] = d_i,
///
/// for the interior nodes 1..n-2 of a row of n nodes; nodes 0 and n-1 carry
/// known values. With drift alpha = -beta/2 the central weights
/// l = beta/(2dx^2) + beta/(4dx), r = beta/(2dx^2) - beta/(4dx) are both
/// non-negative whenever dx < 2, so the matrix is an M-matrix.
class RowStepper {
public:
    /// Martingale drift -beta/2. `beta` has one entry per row node.
    void assemble(std::span<const double> beta, double dt, double dx);
    /// General drift; falls back to one-sided differences where the central
    /// weights would be negative.
    void assemble(std::span<const double> beta, std::span<const double> drift, double dt, double dx);

    /// Solves for the interior of `u` (size n) in place. On entry u[0] and
    /// u[n-1] hold the boundary values and u[1..n-2] the right-hand side.
    void solve(std::span<double> u) const;

    [[nodiscard]] std::size_t size() const { return n_; }

private:
    void factor();

    std::size_t n_ = 0;
    std::vector<double> lower_;   // a_k
    std::vector<double> upper_;   // c_k
    std::vector<double> diag_;    // b_k
    std::vector<double> cprime_;
    std::vector<double> inv_;
};

/// z_i = (u_xx - u_x)/2 from central differences: the argument of the
/// restricted conjugate at interior node i.
[[nodiscard]] inline double conjugate_argument(std::span<const double> u, std::size_t i, double dx) {
    const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
    const double d1 = (u[i + 1] - u[i - 1]) / (2.0 * dx);
    return 0.5 * (d2 - d1);
}

}  // namespace voltran::detail
