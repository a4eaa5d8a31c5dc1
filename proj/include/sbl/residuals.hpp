#pragma once

/// @file residuals.hpp
/// @brief Momentum defects of the assembled approximation. Collects every
///        layer and outer correction into one LayerSet with the composite
///        velocities, evaluates the angular and radial momentum errors
///        split by half-powers of the viscosity, and reports the weighted
///        norm whose decay rate the whole construction exists to deliver.
///
/// Bookkeeping rules, applied uniformly:
///  - An equation that was solved by a march, an elliptic solve or a
///    quadrature enters the residual as its own discrete defect, evaluated
///    from the delivered fields, never as an assumed zero. Discretization
///    error and genuine expansion error then show up in the same ledger and
///    can be told apart by grid refinement.
///  - Terms a solve was forced with (the frozen-coefficient and curvature
///    imports of the second march) cancel between neighbouring orders by
///    construction, so the order fields below carry only what survives:
///    the commutator defect at order zero, the collar tails and the window
///    ramp at order one half.
///  - The outer angular-momentum defect needs care at the rays: its exact
///    value is a product of a collar profile in the angle and a radial
///    tail integral of the side data, and the collar width shrinks with
///    the viscosity below any fixed grid. Inside the collars the stored
///    tails are therefore evaluated directly; outside them the exact value
///    is zero and a finite-difference evaluation measures pure
///    discretization error. Both pieces are kept.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbl/calculus.hpp"
#include "sbl/cutoff.hpp"
#include "sbl/euler1.hpp"
#include "sbl/field.hpp"
#include "sbl/grid.hpp"
#include "sbl/io.hpp"
#include "sbl/prandtl0.hpp"
#include "sbl/prandtl1.hpp"
#include "sbl/scenario.hpp"

namespace sbl {

// ---------------------------------------------------------------------------
// Layer collection
// ---------------------------------------------------------------------------

/// Every velocity and pressure contribution on one evaluation grid, plus
/// the composite fields the boundary conditions are checked on. The first
/// angular composite absorbs a sqrt(eps) factor on both first-order
/// corrections; the radial composite carries the outer correction at full
/// size, which is what makes the surface trace cancel.
struct LayerSet {
    GridPtr grid;

    Field u0e; ///< outer shear sampled at r(R)
    Field u0p, v0p;
    Field u1e, v1e;
    Field u1p, v1p; ///< windowed layer pair

    Field P0e, P0p, P1e, P1p, P2p;

    Field u_s;   ///< u0e + u0p + sqrt(eps) u1e
    Field v_s;   ///< v0p + v1e
    Field u_app; ///< u_s + sqrt(eps) u1p
    Field v_app; ///< v_s + sqrt(eps) v1p

    double u_trace_gap = 0.0; ///< max |u_app(., R0) - u_b|
    double v_trace_gap = 0.0; ///< max |v_app(., R0)|

    ordered_json diagnostics() const {
        ordered_json d;
        d["u_trace_gap"] = u_trace_gap;
        d["v_trace_gap"] = v_trace_gap;
        d["sup_u_app"] = u_app.max_abs();
        d["sup_v_app"] = v_app.max_abs();
        return d;
    }
};

/// Collects the upstream solves into a LayerSet and checks the surface
/// assembly: the slip of the composite angular velocity against the disk
/// speed and the penetration of the composite radial velocity. Either gap
/// beyond `trace_tol` is an assembly error, reported with both numbers so
/// the offending boundary is identifiable.
inline LayerSet assemble_layers(const Scenario& sc, const Prandtl1Inputs& in,
                                const CutoffLayers& cut, const P2PResult& p2,
                                const Euler1Result& er,
                                double trace_tol = 1e-4) {
    const auto grid = in.grid;
    const auto& g = *grid;
    if (cut.u1p.grid().get() != grid.get() ||
        p2.P.grid().get() != grid.get())
        throw std::invalid_argument("assemble_layers: grid mismatch");
    const double sq = g.params().sqeps();

    LayerSet L;
    L.grid = grid;
    L.u0e = Field(grid, 0.0, "u0e");
    for (std::size_t j = 0; j < g.n_R(); ++j)
        for (std::size_t i = 0; i < g.n_omega(); ++i)
            L.u0e(i, j) = in.u0e_at_r[j];
    L.u0p = in.u0p;
    L.v0p = in.v0p;
    L.u1e = in.u1e;
    L.v1e = in.v1e;
    L.u1p = cut.u1p;
    L.v1p = cut.v1p;

    // Constant layer pressure, pinned at zero: only derivatives enter the
    // momentum balance, so the constant is free and zero keeps every
    // pressure field comparable.
    L.P0p = Field(grid, 0.0, "P0p");

    // Leading outer pressure by quadrature of its own radial balance along
    // the r image of the radial axis; vanishes at the surface.
    {
        std::vector<double> f(g.n_R());
        for (std::size_t j = 0; j < g.n_R(); ++j)
            f[j] = in.u0e_at_r[j] * in.u0e_at_r[j] / g.r(j);
        const auto cum = cumtrapz_line(f, g.r_nodes());
        L.P0e = Field(grid, 0.0, "P0e");
        for (std::size_t j = 0; j < g.n_R(); ++j)
            for (std::size_t i = 0; i < g.n_omega(); ++i)
                L.P0e(i, j) = cum[j];
    }

    L.P1e = to_layer_grid(er.P, grid);
    L.P1p = in.P1P;
    L.P1p.set_label("P1p");
    L.P2p = p2.P;
    L.P2p.set_label("P2p");

    L.u_s = L.u0e + L.u0p;
    {
        Field t = L.u1e;
        t *= sq;
        L.u_s += t;
    }
    L.u_s.set_label("u_s");
    L.v_s = L.v0p + L.v1e;
    L.v_s.set_label("v_s");
    L.u_app = L.u_s;
    {
        Field t = L.u1p;
        t *= sq;
        L.u_app += t;
    }
    L.u_app.set_label("u_app");
    L.v_app = L.v_s;
    {
        Field t = L.v1p;
        t *= sq;
        L.v_app += t;
    }
    L.v_app.set_label("v_app");

    for (std::size_t i = 0; i < g.n_omega(); ++i) {
        L.u_trace_gap =
            std::max(L.u_trace_gap, std::abs(L.u_app(i, 0) - sc.u_b));
        L.v_trace_gap = std::max(L.v_trace_gap, std::abs(L.v_app(i, 0)));
    }
    if (L.u_trace_gap > trace_tol || L.v_trace_gap > trace_tol)
        throw std::runtime_error(
            "assemble_layers: surface assembly broken: slip gap " +
            std::to_string(L.u_trace_gap) + ", penetration gap " +
            std::to_string(L.v_trace_gap) + ", tolerance " +
            std::to_string(trace_tol));
    return L;
}

// ---------------------------------------------------------------------------
// Residual fields
// ---------------------------------------------------------------------------

/// One half-power order of a momentum error: the content field at its
/// natural scale and the viscosity exponent it enters the total with.
struct OrderTerm {
    std::string label; ///< half-power tag: "-1", "-1/2", "0", ...
    double power;      ///< exponent of eps in the total
    Field field;
};

struct ResidualFields {
    GridPtr grid;
    Field total; ///< sum of eps^power * field over the orders
    std::vector<OrderTerm> orders;

    const Field& order(const std::string& label) const {
        for (const auto& t : orders)
            if (t.label == label) return t.field;
        throw std::out_of_range("ResidualFields: no order '" + label + "'");
    }
};

namespace detail {

inline Field order_total(GridPtr grid, const std::vector<OrderTerm>& orders) {
    const double eps = grid->params().eps;
    Field tot(grid);
    for (const auto& t : orders) {
        Field s = t.field;
        s *= std::pow(eps, t.power);
        tot += s;
    }
    return tot;
}

/// Node defect of a quadrature-solved pressure relation dP/dx = sign * f:
/// forward difference over the cell against the trapezoid average of f, the
/// exact identity the quadrature was built from. Interior nodes take their
/// right cell, the last node its left cell.
inline Field quadrature_defect(const Field& P, const Field& f,
                               const std::vector<double>& x, double sign) {
    const auto grid = P.grid();
    const auto& g = *grid;
    Field out(grid);
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 0; j < g.n_R(); ++j) {
            const std::size_t c = (j + 1 < g.n_R()) ? j : j - 1;
            out(i, j) = (P(i, c + 1) - P(i, c)) / (x[c + 1] - x[c]) -
                        sign * 0.5 * (f(i, c) + f(i, c + 1));
        }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Angular momentum error
// ---------------------------------------------------------------------------

/// Angular momentum error of the assembled fields, split into half-power
/// orders of eps. Orders "0" and "1/2" evaluate the two marched balances as
/// discrete defects plus the surviving expansion errors (commutator,
/// collar tails, window ramp); orders "1", "3/2" and "2" are direct
/// transcriptions of the remaining terms, with every outer derivative
/// formed on the outer solver's own grid before resampling.
inline ResidualFields eval_Ru(const Scenario& sc, const LayerSet& lay,
                              const Prandtl1Inputs& in,
                              const Euler1Result& er) {
    const auto grid = lay.grid;
    const auto& g = *grid;
    const double sq = g.params().sqeps();
    const double R0 = g.params().R0;
    const std::size_t nw = g.n_omega(), nr = g.n_R();

    ResidualFields out;
    out.grid = grid;

    // Order 0: the surface-frozen transport form the leading march solved,
    // evaluated with the marched derivative fields, plus the commutator
    // defect. The radial transport coefficient uses the outer surface trace
    // delivered by the outer solve, so its trace mismatch is charged here.
    {
        const Field u0pRR = d_R(in.u0p_R);
        Field o0(grid, 0.0, "Ru:0");
        const double ue = in.u0e_at_r[0];
        for (std::size_t i = 0; i < nw; ++i) {
            const double vtr = lay.v1e(i, 0);
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                const double transport =
                    (ue + in.u0p(i, j)) * in.u0_omega(i, j) +
                    (r * in.v0p(i, j) + R0 * vtr) * in.u0p_R(i, j) -
                    R0 * u0pRR(i, j);
                o0(i, j) = (transport + in.e2(i, j)) / r;
            }
        }
        out.orders.push_back({"0", 0.0, std::move(o0)});
    }

    // Order 1/2, outer part: angular-momentum defect of the outer
    // correction. Finite differences outside the collars (exact value
    // zero there), stored collar tails inside them.
    Field o12(grid, 0.0, "Ru:1/2");
    {
        const auto& ge = *er.grid;
        const double theta0 = ge.params().theta0;
        const CutoffWindow chi = CutoffWindow::collar();
        std::vector<double> u0e_e(ge.n_R()), u0e_r_e(ge.n_R());
        for (std::size_t j = 0; j < ge.n_R(); ++j) {
            u0e_e[j] = sc.u0e(ge.r(j));
            u0e_r_e[j] = sc.u0e_r(ge.r(j));
        }
        const Field ue_om = d_omega(er.u);
        const Field Pe_om = d_omega(er.P);
        Field Dfd(er.grid, 0.0, "outer_momentum_defect");
        for (std::size_t i = 0; i < ge.n_omega(); ++i) {
            const double om = ge.omega(i);
            const bool collar = chi(om / er.eps) > 0.0 ||
                                chi((theta0 - om) / er.eps) > 0.0;
            if (collar) continue;
            for (std::size_t j = 0; j < ge.n_R(); ++j) {
                const double r = ge.r(j);
                Dfd(i, j) = (ue_om(i, j) * u0e_e[j]) / r +
                            er.v(i, j) * u0e_r_e[j] +
                            (u0e_e[j] * er.v(i, j)) / r + Pe_om(i, j) / r;
            }
        }
        o12 = to_layer_grid(Dfd, grid);
        const Field tails = er.angular_error_leftover(grid);
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j)
                o12(i, j) -= tails(i, j) / g.r(j);
    }

    // Order 1/2, layer part: the second march's balance applied to the
    // windowed pair against the forcing it was solved with. In the window
    // plateau this is the march's own truncation error; on the ramp the
    // window derivatives contribute the genuine truncation terms.
    {
        const Field u1p_om = d_omega(lay.u1p);
        const Field u1p_R = d_R(lay.u1p);
        const Field u1p_RR = d_RR(lay.u1p);
        const Field Q = (in.F - in.E0) + in.E1;
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                const double march =
                    in.u0_omega(i, j) * lay.u1p(i, j) +
                    in.u0(i, j) * u1p_om(i, j) +
                    r * (in.v0p(i, j) + in.v1e(i, j)) * u1p_R(i, j) +
                    (in.u0p_R(i, j) + sq * in.u0e_r[j]) *
                        (r * lay.v1p(i, j)) -
                    r * u1p_RR(i, j);
                o12(i, j) += (march - Q(i, j)) / r;
            }
        o12.set_label("Ru:1/2");
        out.orders.push_back({"1/2", 0.5, std::move(o12)});
    }

    // Shared first-order derivative transfers, formed on the outer grid.
    const Field u1e_r = to_layer_grid(d_R(er.u), grid);
    const Field u1e_om = to_layer_grid(d_omega(er.u), grid);
    const Field u1p_om = d_omega(lay.u1p);
    const Field u1p_R = d_R(lay.u1p);

    // Order 1: transport of the first-order corrections by themselves and
    // by the leading fields, the second pressure corrector, and the
    // leading-order viscous terms.
    {
        const Field P2w = d_omega(lay.P2p);
        const Field u0p_ww = d_omega(in.u0_omega);
        Field o1(grid, 0.0, "Ru:1");
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                const double u1 = lay.u1e(i, j) + lay.u1p(i, j);
                const double vs = in.v0p(i, j) + in.v1e(i, j);
                o1(i, j) = u1 * (u1e_om(i, j) + u1p_om(i, j)) / r +
                           vs * u1e_r(i, j) +
                           lay.v1p(i, j) * u1p_R(i, j) +
                           in.u0(i, j) * lay.v1p(i, j) / r + u1 * vs / r +
                           P2w(i, j) / r - in.u0e_rr[j] -
                           (in.u0e_r[j] + u1p_R(i, j)) / r -
                           u0p_ww(i, j) / (r * r) + in.u0(i, j) / (r * r);
            }
        out.orders.push_back({"1", 1.0, std::move(o1)});
    }

    // Order 3/2: viscous terms of the first-order corrections and the
    // angular derivatives of the radial pair.
    {
        const Field u1e_rr = to_layer_grid(d_RR(er.u), grid);
        const Field u1e_ww = to_layer_grid(d_omega_omega(er.u), grid);
        const Field u1p_ww = d_omega_omega(lay.u1p);
        const Field v0p_om = d_omega(in.v0p);
        const Field v1e_om = to_layer_grid(er.v_omega, grid);
        Field o32(grid, 0.0, "Ru:3/2");
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                const double u1 = lay.u1e(i, j) + lay.u1p(i, j);
                o32(i, j) = lay.v1p(i, j) * u1e_r(i, j) +
                            u1 * lay.v1p(i, j) / r - u1e_rr(i, j) -
                            u1e_r(i, j) / r -
                            (u1e_ww(i, j) + u1p_ww(i, j)) / r +
                            u1 / (r * r) -
                            2.0 * (v0p_om(i, j) + v1e_om(i, j)) / (r * r);
            }
        out.orders.push_back({"3/2", 1.5, std::move(o32)});
    }

    // Order 2: the lone angular derivative of the windowed radial layer.
    {
        const Field v1p_om = d_omega(lay.v1p);
        Field o2(grid, 0.0, "Ru:2");
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j)
                o2(i, j) = 2.0 * v1p_om(i, j) / (g.r(j) * g.r(j));
        out.orders.push_back({"2", 2.0, std::move(o2)});
    }

    out.total = detail::order_total(grid, out.orders);
    out.total.set_label("Ru");
    return out;
}

// ---------------------------------------------------------------------------
// Radial momentum error
// ---------------------------------------------------------------------------

/// Radial momentum error of the assembled fields. The four pressure
/// corrections were all defined by quadrature of their own radial balance,
/// so orders "-1" through "0" are quadrature defects (the layer pressure is
/// constant and contributes an exact zero); orders "1/2" on are direct
/// transcriptions, outer-only content evaluated on the outer grid.
inline ResidualFields eval_Rv(const Scenario& sc, const LayerSet& lay,
                              const Prandtl1Inputs& in,
                              const Euler1Result& er, const P2PResult& p2) {
    const auto grid = lay.grid;
    const auto& g = *grid;
    const std::size_t nw = g.n_omega(), nr = g.n_R();
    if (p2.integrand.empty() || p2.integrand.grid().get() != grid.get())
        throw std::invalid_argument(
            "eval_Rv: second pressure corrector lacks its integrand");

    ResidualFields out;
    out.grid = grid;

    // Order -1: the layer pressure is constant, its gradient identically
    // zero; kept as an explicit zero so every listed order is accounted.
    out.orders.push_back({"-1", -1.0, Field(grid, 0.0, "Rv:-1")});

    // Order -1/2: leading outer pressure against the centrifugal balance
    // it was integrated from, plus the first layer corrector against its
    // decaying-products integrand.
    {
        Field cf(grid), I1(grid);
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                cf(i, j) = in.u0e_at_r[j] * in.u0e_at_r[j] / r;
                I1(i, j) = (in.u0p(i, j) * in.u0p(i, j) +
                            2.0 * in.u0e_at_r[j] * in.u0p(i, j)) / r;
            }
        Field o = detail::quadrature_defect(lay.P0e, cf, g.r_nodes(), 1.0);
        o += detail::quadrature_defect(lay.P1p, I1, g.R_nodes(), -1.0);
        o.set_label("Rv:-1/2");
        out.orders.push_back({"-1/2", -0.5, std::move(o)});
    }

    // Order 0: first outer pressure on its own grid, second layer
    // corrector on this one.
    {
        const auto& ge = *er.grid;
        Field G(er.grid);
        for (std::size_t i = 0; i < ge.n_omega(); ++i)
            for (std::size_t j = 0; j < ge.n_R(); ++j)
                G(i, j) = (sc.u0e(ge.r(j)) / ge.r(j)) *
                          (2.0 * er.u(i, j) - er.v_omega(i, j));
        Field o = to_layer_grid(
            detail::quadrature_defect(er.P, G, ge.r_nodes(), 1.0), grid);
        o += detail::quadrature_defect(p2.P, p2.integrand, g.R_nodes(), -1.0);
        o.set_label("Rv:0");
        out.orders.push_back({"0", 0.0, std::move(o)});
    }

    // Shared transfers for the direct orders.
    const Field v1e_r = to_layer_grid(d_R(er.v), grid);
    const Field v1e_om = to_layer_grid(er.v_omega, grid);
    const Field v1p_om = d_omega(lay.v1p);
    const Field v1p_R = d_R(lay.v1p);

    // Order 1/2: outer self-transport (outer grid), and the layer terms:
    // angular transport of the radial pair, its radial self-transport, the
    // centrifugal coupling of the first-order angular corrections, and the
    // layer viscous terms.
    {
        Field q(er.grid);
        const Field ve_r = d_R(er.v);
        for (std::size_t i = 0; i < er.grid->n_omega(); ++i)
            for (std::size_t j = 0; j < er.grid->n_R(); ++j) {
                const double r = er.grid->r(j);
                q(i, j) = er.u(i, j) * er.v_omega(i, j) / r +
                          er.v(i, j) * ve_r(i, j) -
                          er.u(i, j) * er.u(i, j) / r;
            }
        Field o = to_layer_grid(q, grid);

        const Field v0p_om = d_omega(in.v0p);
        const Field v0p_R = d_R(in.v0p);
        const Field v1p_RR = d_RR(lay.v1p);
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                o(i, j) += (lay.u1e(i, j) * v0p_om(i, j) +
                            lay.u1p(i, j) *
                                (v0p_om(i, j) + v1e_om(i, j))) / r +
                           in.u0(i, j) * v1p_om(i, j) / r +
                           lay.v1p(i, j) * v0p_R(i, j) +
                           in.v0p(i, j) * (v1e_r(i, j) + v1p_R(i, j)) +
                           lay.v1e(i, j) * v1p_R(i, j) -
                           (2.0 * lay.u1e(i, j) * lay.u1p(i, j) +
                            lay.u1p(i, j) * lay.u1p(i, j)) / r -
                           v0p_R(i, j) / r +
                           2.0 * in.u0_omega(i, j) / (r * r) -
                           v1p_RR(i, j);
            }
        o.set_label("Rv:1/2");
        out.orders.push_back({"1/2", 0.5, std::move(o)});
    }

    // Order 1: outer viscous terms (outer grid), layer transport of the
    // windowed radial pair and the layer viscous terms.
    {
        Field q(er.grid);
        const Field ve_r = d_R(er.v);
        const Field ve_rr = d_RR(er.v);
        const Field ve_ww = d_omega_omega(er.v);
        const Field ue_om = d_omega(er.u);
        for (std::size_t i = 0; i < er.grid->n_omega(); ++i)
            for (std::size_t j = 0; j < er.grid->n_R(); ++j) {
                const double r = er.grid->r(j);
                q(i, j) = -ve_rr(i, j) - ve_r(i, j) / r -
                          ve_ww(i, j) / (r * r) +
                          2.0 * ue_om(i, j) / (r * r) +
                          er.v(i, j) / (r * r);
            }
        Field o = to_layer_grid(q, grid);

        const Field v0p_ww = d_omega_omega(in.v0p);
        const Field u1p_om = d_omega(lay.u1p);
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) {
                const double r = g.r(j);
                o(i, j) += lay.u1p(i, j) * v1p_om(i, j) / r +
                           lay.u1e(i, j) * v1p_om(i, j) / r +
                           lay.v1p(i, j) * v1e_r(i, j) +
                           lay.v1p(i, j) * v1p_R(i, j) -
                           v1p_R(i, j) / r - v0p_ww(i, j) / (r * r) +
                           2.0 * u1p_om(i, j) / (r * r) +
                           in.v0p(i, j) / (r * r);
            }
        o.set_label("Rv:1");
        out.orders.push_back({"1", 1.0, std::move(o)});
    }

    // Order 3/2: the second angular derivative of the windowed radial
    // layer, the only survivor.
    {
        const Field v1p_ww = d_omega_omega(lay.v1p);
        Field o(grid, 0.0, "Rv:3/2");
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j)
                o(i, j) = -v1p_ww(i, j) / (g.r(j) * g.r(j));
        out.orders.push_back({"3/2", 1.5, std::move(o)});
    }

    out.total = detail::order_total(grid, out.orders);
    out.total.set_label("Rv");
    return out;
}

// ---------------------------------------------------------------------------
// Weighted residual norm
// ---------------------------------------------------------------------------

struct ResidualNormReport {
    double total = 0.0; ///< angular norm + sqrt(eps) * radial norm
    double ru = 0.0;
    double rv = 0.0;
    double delta = 0.0;
    double eps = 0.0;
    /// Per-order contributions measured in the same weight, each scaled by
    /// its eps power (radial ones also by the overall sqrt(eps)).
    std::vector<std::pair<std::string, double>> ru_orders, rv_orders;

    ordered_json diagnostics() const {
        ordered_json d;
        d["total"] = total;
        d["ru"] = ru;
        d["rv"] = rv;
        d["delta"] = delta;
        d["eps"] = eps;
        ordered_json a, b;
        for (const auto& [k, v] : ru_orders) a[k] = v;
        for (const auto& [k, v] : rv_orders) b[k] = v;
        d["ru_orders"] = a;
        d["rv_orders"] = b;
        return d;
    }
};

/// Weighted L2 norm with the residual weight r^(2+delta).
inline double residual_l2(const Field& f, double delta) {
    return std::sqrt(integrate_sector(hadamard(f, f), 2.0 + delta));
}

/// The rate-bearing quantity: the r^(2+delta)-weighted L2 norm of the
/// angular error plus sqrt(eps) times the same norm of the radial error,
/// with per-order attributions. The weight exponent must stay strictly
/// below 1: the outer residual decays only algebraically, the weighted
/// square integrand then behaves like r^(delta-2) far out, and that
/// integral diverges once delta reaches 1.
inline ResidualNormReport residual_norm(const ResidualFields& ru,
                                        const ResidualFields& rv,
                                        double delta) {
    if (!(delta >= 0.0) || !(delta < 1.0))
        throw std::invalid_argument(
            "residual_norm: need 0 <= delta < 1; at delta >= 1 the weighted "
            "square integral of the algebraically decaying outer terms "
            "behaves like the divergent integral of r^(delta-2)");
    if (ru.grid.get() != rv.grid.get())
        throw std::invalid_argument("residual_norm: grid mismatch");

    ResidualNormReport rep;
    rep.delta = delta;
    rep.eps = ru.grid->params().eps;
    const double sq = std::sqrt(rep.eps);

    rep.ru = residual_l2(ru.total, delta);
    rep.rv = residual_l2(rv.total, delta);
    rep.total = rep.ru + sq * rep.rv;
    for (const auto& t : ru.orders)
        rep.ru_orders.emplace_back(
            t.label, std::pow(rep.eps, t.power) * residual_l2(t.field, delta));
    for (const auto& t : rv.orders)
        rep.rv_orders.emplace_back(
            t.label,
            sq * std::pow(rep.eps, t.power) * residual_l2(t.field, delta));
    return rep;
}

} // namespace sbl
