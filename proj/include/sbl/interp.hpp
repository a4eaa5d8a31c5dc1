#pragma once

/// @file interp.hpp
/// @brief Monotone cubic (PCHIP) interpolation and field resampling between
///        grids. Shape preservation matters here: layer profiles are
///        monotone in R and overshooting interpolants would create spurious
///        sign changes in downstream derivative stencils.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sbl/field.hpp"

namespace sbl {

/// Fritsch-Carlson piecewise cubic Hermite interpolant.
class Pchip {
  public:
    Pchip(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("Pchip: need matching sizes >= 2");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i + 1] > x_[i]))
                throw std::invalid_argument("Pchip: nodes must increase");
        d_.resize(n);
        if (n == 2) {
            d_[0] = d_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            return;
        }
        std::vector<double> h(n - 1), del(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            del[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (del[i - 1] * del[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        d_[0] = edge_slope(h[0], h[1], del[0], del[1]);
        d_[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }

    double operator()(double xq) const { return eval(xq, false); }
    double deriv(double xq) const { return eval(xq, true); }

  private:
    static double edge_slope(double h0, double h1, double del0, double del1) {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0) return 0.0;
        if (del0 * del1 < 0.0 && std::abs(d) > 3.0 * std::abs(del0))
            return 3.0 * del0;
        return d;
    }

    double eval(double xq, bool want_deriv) const {
        // Clamp to the end segments; queries stay in range by construction
        // and tiny roundoff excursions should not throw.
        auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        std::size_t i = (it == x_.begin()) ? 0 : std::size_t(it - x_.begin()) - 1;
        i = std::min(i, x_.size() - 2);
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        if (!want_deriv) {
            const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
            const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
            return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] +
                   h * h11 * d_[i + 1];
        }
        const double g00 = (6 * t2 - 6 * t) / h, g10 = 3 * t2 - 4 * t + 1;
        const double g01 = (-6 * t2 + 6 * t) / h, g11 = 3 * t2 - 2 * t;
        return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
    }

    std::vector<double> x_, y_, d_;
};

/// Interpolate samples (x, y) onto query nodes xq.
inline std::vector<double> pchip_resample(const std::vector<double>& x,
                                          const std::vector<double>& y,
                                          const std::vector<double>& xq) {
    Pchip p(x, y);
    std::vector<double> out(xq.size());
    for (std::size_t k = 0; k < xq.size(); ++k) out[k] = p(xq[k]);
    return out;
}

/// Resample a field onto a destination grid: PCHIP along R per source omega
/// row, then PCHIP along omega per destination R column. Destination nodes
/// outside the source box are clamped-extrapolated by the end cubics.
inline Field resample(const Field& f, GridPtr dst) {
    const auto& gs = *f.grid();
    const auto& gd = *dst;
    // Pass 1: source omega rows onto destination R nodes.
    std::vector<std::vector<double>> mid(gs.n_omega());
    for (std::size_t i = 0; i < gs.n_omega(); ++i) {
        std::vector<double> row(gs.n_R());
        for (std::size_t j = 0; j < gs.n_R(); ++j) row[j] = f(i, j);
        mid[i] = pchip_resample(gs.R_nodes(), row, gd.R_nodes());
    }
    // Pass 2: destination R columns onto destination omega nodes.
    Field out(dst, 0.0, f.label());
    std::vector<double> col(gs.n_omega());
    for (std::size_t j = 0; j < gd.n_R(); ++j) {
        for (std::size_t i = 0; i < gs.n_omega(); ++i) col[i] = mid[i][j];
        auto newcol = pchip_resample(gs.omega_nodes(), col, gd.omega_nodes());
        for (std::size_t i = 0; i < gd.n_omega(); ++i) out(i, j) = newcol[i];
    }
    return out;
}

} // namespace sbl
