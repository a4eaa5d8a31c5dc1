#pragma once

/// @file calculus.hpp
/// @brief Discrete calculus on sector grids: finite differences (second
///        order, one-sided at boundaries), trapezoid quadrature, cumulative
///        and tail integrals, and divergence evaluators.
///
/// Cross-axis difference operators on a tensor grid commute exactly, which
/// the layer constructions exploit to produce machine-divergence-free
/// velocity pairs from stream functions. Same-axis "integrate then
/// differentiate" round trips are exact only on the midpoint lattice; the
/// midpoint defect helpers below evaluate identities there.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sbl/field.hpp"

namespace sbl {

namespace detail {

/// Fornberg's algorithm: weights of f(x[0..n-1]) in the m-th derivative at z.
/// W has n rows and m+1 columns, W[j][k] = weight of node j in derivative k.
inline std::vector<std::vector<double>> fd_weights(double z, const double* x,
                                                   int n, int m) {
    std::vector<std::vector<double>> W(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    W[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    W[i][k] = c1 * (k * W[i - 1][k - 1] - c5 * W[i - 1][k]) / c2;
                W[i][0] = -c1 * c5 * W[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                W[j][k] = (c4 * W[j][k] - k * W[j][k - 1]) / c3;
            W[j][0] = c4 * W[j][0] / c3;
        }
        c1 = c2;
    }
    return W;
}

/// Stencil (start index, weights) for the m-th derivative at node j.
/// Interior stencils are 3-point centered; boundary stencils are one-sided
/// with enough points to stay second order (3 for m=1, 4 for m=2).
inline std::pair<std::size_t, std::vector<double>> deriv_stencil(
    const std::vector<double>& x, std::size_t j, int m) {
    const std::size_t n = x.size();
    const std::size_t width = (m == 1) ? 3 : ((j == 0 || j + 1 == n) ? 4 : 3);
    if (n < width) throw std::invalid_argument("axis too short for stencil");
    std::size_t s = (j == 0) ? 0 : (j + 1 == n) ? n - width : j - 1;
    auto W = fd_weights(x[j], x.data() + s, int(width), m);
    std::vector<double> w(width);
    for (std::size_t k = 0; k < width; ++k) w[k] = W[k][m];
    return {s, std::move(w)};
}

} // namespace detail

/// m-th derivative of a sampled line along its node vector.
inline std::vector<double> deriv_line(const std::vector<double>& f,
                                      const std::vector<double>& x, int m) {
    if (f.size() != x.size())
        throw std::invalid_argument("deriv_line: size mismatch");
    std::vector<double> out(f.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        auto [s, w] = detail::deriv_stencil(x, j, m);
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f[s + k];
        out[j] = acc;
    }
    return out;
}

/// Cumulative trapezoid from x[0]; out[0] = 0.
inline std::vector<double> cumtrapz_line(const std::vector<double>& f,
                                         const std::vector<double>& x) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t j = 1; j < f.size(); ++j)
        out[j] = out[j - 1] + 0.5 * (f[j] + f[j - 1]) * (x[j] - x[j - 1]);
    return out;
}

inline double trapz_line(const std::vector<double>& f,
                         const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t j = 1; j < f.size(); ++j)
        acc += 0.5 * (f[j] + f[j - 1]) * (x[j] - x[j - 1]);
    return acc;
}

/// Trapezoid weights of one axis.
inline std::vector<double> trapz_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        const double h = x[j + 1] - x[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Field-level operators
// ---------------------------------------------------------------------------

namespace detail {

template <bool AlongOmega>
Field apply_deriv(const Field& f, int m) {
    const auto& g = *f.grid();
    const auto& x = AlongOmega ? g.omega_nodes() : g.R_nodes();
    Field out(f.grid());
    const std::size_t nline = AlongOmega ? g.n_omega() : g.n_R();
    for (std::size_t j = 0; j < nline; ++j) {
        auto [s, w] = deriv_stencil(x, j, m);
        const std::size_t nother = AlongOmega ? g.n_R() : g.n_omega();
        for (std::size_t o = 0; o < nother; ++o) {
            double acc = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k)
                acc += w[k] * (AlongOmega ? f(s + k, o) : f(o, s + k));
            (AlongOmega ? out(j, o) : out(o, j)) = acc;
        }
    }
    return out;
}

} // namespace detail

inline Field d_omega(const Field& f) { return detail::apply_deriv<true>(f, 1); }
inline Field d_R(const Field& f) { return detail::apply_deriv<false>(f, 1); }
inline Field d_RR(const Field& f) { return detail::apply_deriv<false>(f, 2); }
inline Field d_omega_omega(const Field& f) { return detail::apply_deriv<true>(f, 2); }

/// Cumulative trapezoid along R from R0; column j=0 is zero.
inline Field cumtrapz_R(const Field& f) {
    const auto& g = *f.grid();
    Field out(f.grid());
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 1; j < g.n_R(); ++j)
            out(i, j) = out(i, j - 1) +
                        0.5 * (f(i, j) + f(i, j - 1)) * (g.R(j) - g.R(j - 1));
    return out;
}

/// Cumulative trapezoid along omega from 0; row i=0 is zero.
inline Field cumtrapz_omega(const Field& f) {
    const auto& g = *f.grid();
    Field out(f.grid());
    for (std::size_t j = 0; j < g.n_R(); ++j)
        for (std::size_t i = 1; i < g.n_omega(); ++i)
            out(i, j) = out(i - 1, j) + 0.5 * (f(i, j) + f(i - 1, j)) *
                                            (g.omega(i) - g.omega(i - 1));
    return out;
}

/// Per-node tail integral int_{R_j}^{R_max} f dR (trapezoid); last column 0.
/// If |f| at R_max exceeds tol, sets *decay_warning (value still returned).
inline Field tail_integral_R(const Field& f, double tol = -1.0,
                             bool* decay_warning = nullptr) {
    const auto& g = *f.grid();
    if (decay_warning) *decay_warning = false;
    if (tol > 0.0) {
        for (std::size_t i = 0; i < g.n_omega(); ++i)
            if (std::abs(f(i, g.n_R() - 1)) > tol) {
                if (decay_warning) *decay_warning = true;
                break;
            }
    }
    Field cum = cumtrapz_R(f);
    Field out(f.grid());
    for (std::size_t i = 0; i < g.n_omega(); ++i) {
        const double total = cum(i, g.n_R() - 1);
        for (std::size_t j = 0; j < g.n_R(); ++j) out(i, j) = total - cum(i, j);
    }
    return out;
}

/// Integral over the sector of f * r^pow_r with tensor trapezoid weights.
inline double integrate_sector(const Field& f, double pow_r = 0.0) {
    const auto& g = *f.grid();
    const auto wo = trapz_weights(g.omega_nodes());
    const auto wr = trapz_weights(g.R_nodes());
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n_omega(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < g.n_R(); ++j) {
            const double w = (pow_r == 0.0) ? 1.0 : std::pow(g.r(j), pow_r);
            row += f(i, j) * w * wr[j];
        }
        acc += row * wo[i];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Divergence evaluators
// ---------------------------------------------------------------------------

/// Nodal divergence d_omega(u) + d_R(r v); O(h^2) consistency diagnostic for
/// pairs built from a stream function (exactly zero when u = d_R(psi) and
/// r v = -d_omega(psi) on the same grid).
inline Field divergence_nodal(const Field& u, const Field& v) {
    const auto& g = *u.grid();
    Field rv(u.grid());
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 0; j < g.n_R(); ++j) rv(i, j) = g.r(j) * v(i, j);
    return d_omega(u) + d_R(rv);
}

/// Velocity pair (u, v) = (d_R psi, -d_omega psi / r): machine divergence-free.
inline std::pair<Field, Field> velocity_from_stream(const Field& psi) {
    const auto& g = *psi.grid();
    Field u = d_R(psi);
    Field v = d_omega(psi);
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 0; j < g.n_R(); ++j) v(i, j) = -v(i, j) / g.r(j);
    return {std::move(u), std::move(v)};
}

/// Max defect of (u(i+1,.) - u(i,.))/dw + avg_i(X) over omega midpoints.
/// Exact (machine zero) when u was built as u0 - cumtrapz_omega(X).
inline double midpoint_cum_defect_omega(const Field& u, const Field& X) {
    const auto& g = *u.grid();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < g.n_omega(); ++i) {
        const double dw = g.omega(i + 1) - g.omega(i);
        for (std::size_t j = 0; j < g.n_R(); ++j) {
            const double d = (u(i + 1, j) - u(i, j)) / dw +
                             0.5 * (X(i, j) + X(i + 1, j));
            worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

/// Max defect of (P(.,j+1) - P(.,j))/dR + avg_j(w) over R midpoints.
/// Exact when P = tail_integral_R(w).
inline double midpoint_tail_defect_R(const Field& P, const Field& w) {
    const auto& g = *P.grid();
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < g.n_R(); ++j) {
        const double dR = g.R(j + 1) - g.R(j);
        for (std::size_t i = 0; i < g.n_omega(); ++i) {
            const double d =
                (P(i, j + 1) - P(i, j)) / dR + 0.5 * (w(i, j) + w(i, j + 1));
            worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

} // namespace sbl
