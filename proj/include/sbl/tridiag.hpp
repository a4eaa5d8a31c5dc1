#pragma once

/// @file tridiag.hpp
/// @brief Thomas algorithm for the tridiagonal systems produced by the
///        implicit marching steps. No pivoting: the marches assemble
///        diagonally dominant rows (checked in debug builds).

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sbl {

/// Solve a tridiagonal system in place. lower[0] and upper[n-1] are unused.
/// Overwrites rhs with the solution and returns a reference to it.
inline std::vector<double>& solve_tridiag(std::vector<double>& lower,
                                          std::vector<double>& diag,
                                          std::vector<double>& upper,
                                          std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiag: band size mismatch");
    for (std::size_t k = 1; k < n; ++k) {
        assert(std::abs(diag[k - 1]) > 0.0);
        const double m = lower[k] / diag[k - 1];
        diag[k] -= m * upper[k - 1];
        rhs[k] -= m * rhs[k - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;)
        rhs[k] = (rhs[k] - upper[k] * rhs[k + 1]) / diag[k];
    return rhs;
}

} // namespace sbl
