#pragma once

/// @file prandtl0.hpp
/// @brief Leading-order boundary layer at the disk surface. The angular
///        momentum balance reduces, after the von Mises change of variables
///        eta = int (u_e + u) dR with u_e the constant surface trace of the
///        outer flow, to a quasilinear heat equation
///            alpha_w = R0 (alpha alpha_eta)_eta,
///        marched in the angle with backward Euler and a lagged diffusion
///        coefficient. The wall value alpha = u_b and the inflow profile
///        are positive, and the discrete solution inherits the continuous
///        minimum principle, which downstream solves rely on.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sbl/calculus.hpp"
#include "sbl/field.hpp"
#include "sbl/grid.hpp"
#include "sbl/interp.hpp"
#include "sbl/io.hpp"
#include "sbl/scenario.hpp"
#include "sbl/tridiag.hpp"

namespace sbl {

struct Prandtl0Options {
    std::size_t n_eta = 1025;        // uniform transformed-variable nodes
    std::size_t n_omega_march = 2049; // fine march resolution in the angle
    double eta_pad = 10.0;           // transformed domain beyond the map of R_max
    double picard_tol = 1e-10;
    int picard_cap = 50;
    // Manufactured-solution seams, used only by tests: an explicit source
    // added to the marched equation, a direct initial profile in the
    // transformed variable, and a fixed transformed-domain size.
    std::function<double(double, double)> source;
    std::function<double(double)> alpha0_eta;
    double eta_max_override = 0.0;
};

struct Prandtl0Result {
    Field u;        // layer velocity correction on the evaluation grid
    Field u_R;      // its radial derivative, from the transformed frame
    Field u_omega;  // angular derivative, from the fine march
    Field v;        // radial layer velocity, r v = int_R^inf u_omega
    double u_e = 0.0;        // constant surface trace of the outer flow
    double c0 = 0.0;         // positive lower barrier from the data
    double min_alpha = 0.0;  // attained minimum over the whole march
    double eta_max = 0.0;
    int max_picard_sweeps = 0;
    double tail_max_u = 0.0; // |u| on the far column (decay diagnostic)
    double tail_max_v = 0.0;
    bool decay_ok = true;

    ordered_json diagnostics() const {
        ordered_json j;
        j["c0"] = c0;
        j["min_alpha"] = min_alpha;
        j["u_e"] = u_e;
        j["eta_max"] = eta_max;
        j["max_picard_sweeps"] = max_picard_sweeps;
        j["tail_max_u"] = tail_max_u;
        j["tail_max_v"] = tail_max_v;
        j["decay_ok"] = decay_ok;
        return j;
    }
};

inline Prandtl0Result solve_prandtl0(const Scenario& sc, GridPtr eval_grid,
                                     const Prandtl0Options& opt = {}) {
    const auto& g = *eval_grid;
    const ParameterSet& prm = g.params();
    const double R0 = prm.R0;
    const double u_e = sc.u0e(R0);

    // Initial transformed profile: eta(R) = int_R0^R (u_e + ubar0), then
    // alpha(0, eta) = u_e + ubar0(R(eta)) sampled on a uniform eta axis.
    const std::size_t n_eta = opt.n_eta;
    double sup_ubar0 = 0.0;
    {
        for (std::size_t j = 0; j < g.n_R(); ++j)
            sup_ubar0 = std::max(sup_ubar0, sc.ubar0(g.R(j)));
    }
    const double eta_max =
        (opt.eta_max_override > 0.0)
            ? opt.eta_max_override
            : 1.05 * (u_e + sup_ubar0) * (prm.R_max - R0) + opt.eta_pad;

    std::vector<double> eta(n_eta);
    const double h = eta_max / double(n_eta - 1);
    for (std::size_t j = 0; j < n_eta; ++j) eta[j] = h * double(j);

    // Invert eta(R) on a fine R axis to seed alpha at the inflow.
    std::vector<double> alpha(n_eta);
    if (opt.alpha0_eta) {
        for (std::size_t j = 0; j < n_eta; ++j)
            alpha[j] = opt.alpha0_eta(eta[j]);
    } else {
        const std::size_t nf = 4097;
        std::vector<double> Rf(nf), integrand(nf);
        const double span = (eta_max / std::max(u_e + sup_ubar0, 1e-8)) + 1.0;
        for (std::size_t j = 0; j < nf; ++j) {
            Rf[j] = R0 + span * double(j) / double(nf - 1);
            integrand[j] = u_e + sc.ubar0(Rf[j]);
        }
        auto etaR = cumtrapz_line(integrand, Rf);
        Pchip R_of_eta(etaR, Rf); // eta is strictly increasing in R
        for (std::size_t j = 0; j < n_eta; ++j)
            alpha[j] = u_e + sc.ubar0(R_of_eta(eta[j]));
    }
    alpha[0] = sc.u_b; // wall value wins at the corner

    Prandtl0Result res{Field(eval_grid, 0.0, "u0p"),
                       Field(eval_grid, 0.0, "u0p_R"),
                       Field(eval_grid, 0.0, "u0p_omega"),
                       Field(eval_grid, 0.0, "v0p")};
    res.u_e = u_e;
    res.eta_max = eta_max;
    res.c0 = sc.u_b;
    for (double a : alpha) res.c0 = std::min(res.c0, a);
    res.min_alpha = res.c0;

    // Fine march grid in the angle and per-step storage of the layer
    // velocity and its radial derivative on the evaluation R axis.
    const std::size_t nm = opt.n_omega_march;
    std::vector<double> wfine(nm);
    for (std::size_t k = 0; k < nm; ++k)
        wfine[k] = prm.theta0 * double(k) / double(nm - 1);

    std::vector<std::vector<double>> u_rows(nm), uR_rows(nm);

    auto record_row = [&](std::size_t k, const std::vector<double>& a) {
        // Back-transform: R(eta) = R0 + int 1/alpha, then resample onto the
        // evaluation R axis. Beyond the transformed domain the layer is
        // exponentially small; the end cubic extends it smoothly.
        std::vector<double> inv(n_eta), up(n_eta), upR(n_eta);
        for (std::size_t j = 0; j < n_eta; ++j) inv[j] = 1.0 / a[j];
        auto Rnodes = cumtrapz_line(inv, eta);
        for (auto& x : Rnodes) x += R0;
        auto a_eta = deriv_line(a, eta, 1);
        for (std::size_t j = 0; j < n_eta; ++j) {
            up[j] = a[j] - u_e;
            upR[j] = a[j] * a_eta[j];
        }
        u_rows[k] = pchip_resample(Rnodes, up, g.R_nodes());
        uR_rows[k] = pchip_resample(Rnodes, upR, g.R_nodes());
    };
    record_row(0, alpha);

    // Backward Euler step with lagged coefficient and Picard sweeps.
    std::vector<double> lower(n_eta), diag(n_eta), upper(n_eta), rhs(n_eta);
    std::vector<double> lag(n_eta), next(n_eta);
    for (std::size_t k = 1; k < nm; ++k) {
        const double dw = wfine[k] - wfine[k - 1];
        lag = alpha;
        int sweep = 0;
        for (;; ++sweep) {
            // Flux form: (d/deta)(lag * d alpha / deta) on the uniform axis.
            for (std::size_t j = 1; j + 1 < n_eta; ++j) {
                const double am = 0.5 * (lag[j - 1] + lag[j]);
                const double ap = 0.5 * (lag[j] + lag[j + 1]);
                const double c = dw * R0 / (h * h);
                lower[j] = -c * am;
                upper[j] = -c * ap;
                diag[j] = 1.0 + c * (am + ap);
                rhs[j] = alpha[j];
                if (opt.source)
                    rhs[j] += dw * opt.source(wfine[k], eta[j]);
            }
            lower[0] = 0.0; diag[0] = 1.0; upper[0] = 0.0; rhs[0] = sc.u_b;
            const std::size_t e = n_eta - 1;
            lower[e] = 0.0; diag[e] = 1.0; upper[e] = 0.0; rhs[e] = alpha[e];
            next = rhs;
            solve_tridiag(lower, diag, upper, next);
            double delta = 0.0;
            for (std::size_t j = 0; j < n_eta; ++j)
                delta = std::max(delta, std::abs(next[j] - lag[j]));
            lag = next;
            if (delta < opt.picard_tol || sweep + 1 >= opt.picard_cap) break;
        }
        res.max_picard_sweeps = std::max(res.max_picard_sweeps, sweep + 1);
        alpha = lag;
        for (double a : alpha) res.min_alpha = std::min(res.min_alpha, a);
        record_row(k, alpha);
    }

    // The march rows already live on the evaluation R axis; differentiate
    // in the angle on the fine axis, then resample columns onto the
    // evaluation angle nodes.
    const auto& Wq = g.omega_nodes();
    std::vector<double> col(nm), colR(nm);
    for (std::size_t j = 0; j < g.n_R(); ++j) {
        for (std::size_t k = 0; k < nm; ++k) {
            col[k] = u_rows[k][j];
            colR[k] = uR_rows[k][j];
        }
        auto uq = pchip_resample(wfine, col, Wq);
        auto uRq = pchip_resample(wfine, colR, Wq);
        auto dcol = deriv_line(col, wfine, 1);
        auto uwq = pchip_resample(wfine, dcol, Wq);
        for (std::size_t i = 0; i < g.n_omega(); ++i) {
            res.u(i, j) = uq[i];
            res.u_R(i, j) = uRq[i];
            res.u_omega(i, j) = uwq[i];
        }
    }

    // Radial layer velocity from the divergence relation r v = int_R^inf u_w.
    Field rv = tail_integral_R(res.u_omega, prm.decay_tol, nullptr);
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 0; j < g.n_R(); ++j)
            res.v(i, j) = rv(i, j) / g.r(j);

    for (std::size_t i = 0; i < g.n_omega(); ++i) {
        res.tail_max_u =
            std::max(res.tail_max_u, std::abs(res.u(i, g.n_R() - 1)));
        res.tail_max_v =
            std::max(res.tail_max_v, std::abs(res.v(i, g.n_R() - 1)));
    }
    res.decay_ok = res.tail_max_u <= prm.decay_tol;
    return res;
}

/// Defect of the leading-order layer against the full angular momentum
/// balance, split by mechanism.  All three terms vanish with the layer and
/// carry an explicit small factor: the slow radial map only moves the
/// coefficients by sqrt(eps) per unit of the fast coordinate.
struct ProfileErrors {
    Field e0;  ///< frozen-coefficient drift: outer shear and outer divergence
               ///< sampled at r instead of the wall
    Field e1;  ///< curvature of the layer profile times the radial offset
    Field e2;  ///< commutator between the moving sample point and the wall
               ///< value, accumulated along the layer
};

/// Evaluates the three defect fields on the layer grid of `p0`.
///
/// `drv1e` is d/dr of (r times the first-order outer radial velocity),
/// already transferred onto the same grid; pass a zero field while that
/// correction is not available yet.
inline ProfileErrors compute_e_errors(const Scenario& sc,
                                      const Prandtl0Result& p0,
                                      const Field& drv1e) {
    const auto grid = p0.u.grid();
    const auto& g = *grid;
    if (drv1e.grid().get() != grid.get())
        throw std::invalid_argument("compute_e_errors: grid mismatch");
    const double sq = std::sqrt(g.params().eps);
    const double R0 = g.params().R0;

    ProfileErrors pe{Field(grid, 0.0, "e0"), Field(grid, 0.0, "e1"),
                     Field(grid, 0.0, "e2")};
    const Field u_RR = d_R(p0.u_R);

    // Cumulative integrals along R of the two coefficient samples; the
    // commutator term compares them with the frozen endpoint value.
    std::vector<double> shear(g.n_R());
    for (std::size_t j = 0; j < g.n_R(); ++j) shear[j] = sc.u0e_r(g.r(j));
    const auto shear_cum = cumtrapz_line(shear, g.R_nodes());
    const Field drv_cum = cumtrapz_R(drv1e);

    for (std::size_t i = 0; i < g.n_omega(); ++i) {
        for (std::size_t j = 0; j < g.n_R(); ++j) {
            const double dR = g.R(j) - R0;
            pe.e0(i, j) = sq * dR *
                          (shear[j] * p0.u_omega(i, j) +
                           drv1e(i, j) * p0.u_R(i, j));
            pe.e1(i, j) = sq * dR * u_RR(i, j);
            pe.e2(i, j) =
                p0.u_omega(i, j) * sq * (shear_cum[j] - dR * shear[j]) +
                p0.u_R(i, j) * sq * (drv_cum(i, j) - dR * drv1e(i, j));
        }
    }
    return pe;
}

} // namespace sbl
