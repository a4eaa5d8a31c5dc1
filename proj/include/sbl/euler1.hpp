#pragma once

/// @file euler1.hpp
/// @brief First-order outer (Euler) velocity correction on the annular
///        sector.
///
/// The radial correction v solves a second-order elliptic vorticity problem
///   L v = -r (v_rr + v_r/r + v_oo/r^2) + a(r) v - 2 v_r - (2/r) v,
///   a(r) = (r u0e'' + u0e') / u0e,
/// with Dirichlet data on the surface r = R0 (cancelling the layer-0
/// vertical velocity trace) and on both rays. The inhomogeneous data is
/// carried by a boundary blend field B; the remaining unknown w = v - B
/// vanishes on all four sides and solves L w = E_b - L B, where E_b copies
/// the side traces of L B into thin angular collars so the forcing is zero
/// on the rays. The angular correction and the pressure then follow by
/// quadrature:
///   u(omega, r) = u(0, r) - int_0^omega d_r(r v),
///   P(omega, r) = -int_r^inf [ (2/t) u0e u - (u0e/t) v_o ] dt.
///
/// Everything here lives in unscaled radial coordinates on the module's own
/// tensor grid (built with eps = 1 so the two radial node arrays coincide).
/// Use to_layer_grid() to push results onto a boundary-layer evaluation
/// grid. The elliptic operator itself does not depend on eps; one sparse
/// factorization serves every collar width.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "sbl/calculus.hpp"
#include "sbl/cutoff.hpp"
#include "sbl/field.hpp"
#include "sbl/grid.hpp"
#include "sbl/interp.hpp"
#include "sbl/io.hpp"
#include "sbl/params.hpp"
#include "sbl/scenario.hpp"

namespace sbl {

struct Euler1Options {
    std::size_t n_omega = 257;
    std::size_t n_r = 257;
    double r_pad = 30.0;         // computational domain [R0, R0 + r_pad]
    double omega_cluster = 48.0; // two-sided end refinement for the collars
    double r_cluster = 8.0;      // near-surface refinement
};

struct Euler1Result {
    GridPtr grid;   // (omega, r) tensor grid; R and r nodes coincide
    double eps = 0.0;

    Field w;        // homogeneous part, zero on all four sides
    Field v;        // radial correction, w + boundary blend
    Field u;        // angular correction
    Field P;        // pressure correction, zero at the far edge
    Field drv;      // d_r(r v); u_omega == -drv by construction
    Field v_omega;
    Field forcing;  // E_b - L B, zero on both rays

    // Side traces of L B and the running tails int_r^far u0e * trace; the
    // collar part of the angular momentum error is built from these.
    std::vector<double> F_side0, F_side1;
    std::vector<double> tailF0, tailF1;

    double h1_energy = 0.0;     // iint r w_r^2 + w_o^2/r + w^2/r
    double forcing_mass = 0.0;  // iint forcing^2 r
    double h1_ratio = 0.0;      // energy / mass, 0 for zero forcing
    // The sharp prefactor of the energy estimate is the thin-wedge Poincare
    // constant (theta0/pi)^2: the angular terms dominate both sides, so the
    // raw ratio shrinks quadratically with the opening angle. Dividing the
    // factor out leaves the constant that should not depend on the angle.
    double h1_constant = 0.0;
    double trace_mismatch = 0.0; // max |v(., R0) + surface trace|
    double far_v = 0.0;          // max |v| on the truncation edge
    double far_u = 0.0;
    bool collar_resolved = true; // >= 4 omega nodes inside each collar
    bool decay_ok = true;        // pressure tail integrand decayed

    /// Collar part of the angular momentum error, evaluated on any grid
    /// whose r nodes sit inside this result's radial domain.
    Field angular_error_leftover(GridPtr dst) const {
        const auto& ge = *grid;
        Pchip tail0(ge.r_nodes(), tailF0), tail1(ge.r_nodes(), tailF1);
        const CutoffWindow chi = CutoffWindow::collar();
        const double theta0 = ge.params().theta0;
        Field out(dst, 0.0, "angular_error_leftover");
        for (std::size_t i = 0; i < dst->n_omega(); ++i) {
            const double om = dst->omega(i);
            const double c0 = chi(om / eps), c1 = chi((theta0 - om) / eps);
            for (std::size_t j = 0; j < dst->n_R(); ++j) {
                const double r = dst->r(j);
                out(i, j) = c0 * tail0(r) + c1 * tail1(r);
            }
        }
        return out;
    }

    ordered_json diagnostics() const {
        ordered_json d;
        d["eps"] = eps;
        d["n_omega"] = grid->n_omega();
        d["n_r"] = grid->n_R();
        d["h1_energy"] = h1_energy;
        d["forcing_mass"] = forcing_mass;
        d["h1_ratio"] = h1_ratio;
        d["h1_constant"] = h1_constant;
        d["trace_mismatch"] = trace_mismatch;
        d["far_v"] = far_v;
        d["far_u"] = far_u;
        d["collar_resolved"] = collar_resolved;
        d["decay_ok"] = decay_ok;
        return d;
    }
};

/// Resample a field living on the solver's (omega, r) grid onto a
/// boundary-layer grid, evaluating at the r image of the target's R nodes.
inline Field to_layer_grid(const Field& f, GridPtr dst) {
    const auto& gs = *f.grid();
    const auto& gd = *dst;
    std::vector<std::vector<double>> mid(gs.n_omega());
    std::vector<double> row(gs.n_R());
    for (std::size_t i = 0; i < gs.n_omega(); ++i) {
        for (std::size_t j = 0; j < gs.n_R(); ++j) row[j] = f(i, j);
        mid[i] = pchip_resample(gs.r_nodes(), row, gd.r_nodes());
    }
    Field out(dst, 0.0, f.label());
    std::vector<double> col(gs.n_omega());
    for (std::size_t j = 0; j < gd.n_R(); ++j) {
        for (std::size_t i = 0; i < gs.n_omega(); ++i) col[i] = mid[i][j];
        auto newcol = pchip_resample(gs.omega_nodes(), col, gd.omega_nodes());
        for (std::size_t i = 0; i < gd.n_omega(); ++i) out(i, j) = newcol[i];
    }
    return out;
}

class Euler1Solver {
  public:
    Euler1Solver(const Scenario& sc, const ParameterSet& prm,
                 Euler1Options opt = {})
        : sc_(sc), theta0_(prm.theta0), decay_tol_(prm.decay_tol), opt_(opt) {
        ParameterSet ep = prm;
        ep.eps = 1.0; // identity radial map: R nodes are r nodes
        ep.R_max = prm.R0 + opt.r_pad;
        grid_ = build_grid(ep, opt.n_omega, opt.n_r,
                           StretchSpec::two_sided(opt.omega_cluster),
                           StretchSpec::near_lo(opt.r_cluster));
        const auto& r = grid_->r_nodes();
        const std::size_t nr = r.size();
        s0_.resize(nr), s0r_.resize(nr), s0rr_.resize(nr);
        s1_.resize(nr), s1r_.resize(nr), s1rr_.resize(nr);
        a_.resize(nr);
        u0e_.resize(nr);
        for (std::size_t j = 0; j < nr; ++j) {
            s0_[j] = sc.shape0(r[j]);
            s0r_[j] = sc.shape0_r(r[j]);
            s0rr_[j] = sc.shape0_rr(r[j]);
            s1_[j] = sc.shape1(r[j]);
            s1r_[j] = sc.shape1_r(r[j]);
            s1rr_[j] = sc.shape1_rr(r[j]);
            u0e_[j] = sc.u0e(r[j]);
            if (!(u0e_[j] > 0.0))
                throw std::invalid_argument(
                    "Euler1Solver: outer shear must stay positive");
            a_[j] = (r[j] * sc.u0e_rr(r[j]) + sc.u0e_r(r[j])) / u0e_[j];
        }
        factor();
    }

    GridPtr grid() const { return grid_; }

    /// Surface trace of the layer-0 vertical velocity, as node samples.
    /// Angular derivatives are formed on the source axis, then moved onto
    /// the solver grid by monotone cubic interpolation.
    void set_surface_trace(const std::vector<double>& omega,
                           const std::vector<double>& value) {
        if (omega.size() != value.size() || omega.size() < 4)
            throw std::invalid_argument("surface trace: bad sample vectors");
        if (std::abs(omega.front()) > 1e-12 ||
            std::abs(omega.back() - theta0_) > 1e-12)
            throw std::invalid_argument(
                "surface trace: samples must span [0, theta0]");
        const auto d1 = deriv_line(value, omega, 1);
        const auto d2 = deriv_line(value, omega, 2);
        const auto& wn = grid_->omega_nodes();
        t_ = pchip_resample(omega, value, wn);
        t1_ = pchip_resample(omega, d1, wn);
        t2_ = pchip_resample(omega, d2, wn);
    }

    /// Analytic surface trace with derivatives; bypasses interpolation.
    void set_surface_trace(const std::function<double(double)>& t,
                           const std::function<double(double)>& t1,
                           const std::function<double(double)>& t2) {
        const auto& wn = grid_->omega_nodes();
        const std::size_t n = wn.size();
        t_.resize(n), t1_.resize(n), t2_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            t_[i] = t(wn[i]);
            t1_[i] = t1(wn[i]);
            t2_[i] = t2(wn[i]);
        }
    }

    /// Boundary blend carrying the Dirichlet data of v: matches -trace at
    /// the surface and the side data trace * shape on both rays. Written
    /// without trace ratios so vanishing traces need no special casing.
    Field boundary_blend() const {
        require_trace();
        Field B(grid_, 0.0, "boundary_blend");
        for (std::size_t i = 0; i < grid_->n_omega(); ++i) {
            const double hat = grid_->omega(i) / theta0_;
            for (std::size_t j = 0; j < grid_->n_R(); ++j)
                B(i, j) = -t_[i] * ((1.0 - hat) * s0_[j] + hat * s1_[j]);
        }
        return B;
    }

    /// L applied to the blend, exact in r, discrete only through the trace
    /// derivatives. Valid on all nodes including the rays.
    Field blend_image() const {
        require_trace();
        const auto& r = grid_->r_nodes();
        Field F(grid_, 0.0, "blend_image");
        for (std::size_t i = 0; i < grid_->n_omega(); ++i) {
            const double hat = grid_->omega(i) / theta0_;
            for (std::size_t j = 0; j < grid_->n_R(); ++j) {
                const double S = (1.0 - hat) * s0_[j] + hat * s1_[j];
                const double Sr = (1.0 - hat) * s0r_[j] + hat * s1r_[j];
                const double Srr = (1.0 - hat) * s0rr_[j] + hat * s1rr_[j];
                const double Sw = (s1_[j] - s0_[j]) / theta0_; // d_omega S
                const double radial =
                    -r[j] * Srr - 3.0 * Sr + (a_[j] - 2.0 / r[j]) * S;
                // B = -t S  =>  B_oo = -t'' S - 2 t' S_o
                F(i, j) = -t_[i] * radial +
                          (t2_[i] * S + 2.0 * t1_[i] * Sw) / r[j];
            }
        }
        return F;
    }

    /// Pointwise finite-difference application of L (one-sided stencils at
    /// the boundary). Diagnostic path; the sparse solve assembles its own
    /// interior stencils.
    Field apply_operator(const Field& v) const {
        const Field vrr = d_RR(v), vr = d_R(v), voo = d_omega_omega(v);
        const auto& r = grid_->r_nodes();
        Field out(grid_, 0.0);
        for (std::size_t i = 0; i < grid_->n_omega(); ++i)
            for (std::size_t j = 0; j < grid_->n_R(); ++j)
                out(i, j) = -r[j] * vrr(i, j) - 3.0 * vr(i, j) -
                            voo(i, j) / r[j] +
                            (a_[j] - 2.0 / r[j]) * v(i, j);
        return out;
    }

    /// Homogeneous-Dirichlet solve L w = f; boundary rows of f are ignored.
    Field solve_dirichlet(const Field& f) const {
        const std::size_t nw = grid_->n_omega(), nr = grid_->n_R();
        const std::size_t mr = nr - 2;
        Eigen::VectorXd b((nw - 2) * mr);
        for (std::size_t i = 1; i + 1 < nw; ++i)
            for (std::size_t j = 1; j + 1 < nr; ++j)
                b((i - 1) * mr + (j - 1)) = f(i, j);
        Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("Euler1Solver: sparse backsolve failed");
        Field w(grid_, 0.0, "w");
        for (std::size_t i = 1; i + 1 < nw; ++i)
            for (std::size_t j = 1; j + 1 < nr; ++j)
                w(i, j) = x((i - 1) * mr + (j - 1));
        return w;
    }

    /// Full construction for one collar width.
    Euler1Result solve(double eps) const {
        require_trace();
        if (!(eps > 0.0) || eps > theta0_ / 10.0)
            throw std::invalid_argument(
                "Euler1Solver: need 0 < eps <= theta0 / 10");
        const auto& wn = grid_->omega_nodes();
        const auto& r = grid_->r_nodes();
        const std::size_t nw = wn.size(), nr = r.size();

        Euler1Result res;
        res.grid = grid_;
        res.eps = eps;

        const Field B = boundary_blend();
        const Field F = blend_image();
        res.F_side0.resize(nr), res.F_side1.resize(nr);
        for (std::size_t j = 0; j < nr; ++j) {
            res.F_side0[j] = F(0, j);
            res.F_side1[j] = F(nw - 1, j);
        }

        // Collar field: copies the ray traces of F inward over width eps.
        const CutoffWindow chi = CutoffWindow::collar();
        Field Eb(grid_, 0.0, "collar_forcing");
        std::size_t inside = 0;
        for (std::size_t i = 0; i < nw; ++i) {
            const double c0 = chi(wn[i] / eps);
            const double c1 = chi((theta0_ - wn[i]) / eps);
            if (wn[i] > 0.0 && wn[i] < eps) ++inside;
            if (c0 == 0.0 && c1 == 0.0) continue;
            for (std::size_t j = 0; j < nr; ++j)
                Eb(i, j) = c0 * res.F_side0[j] + c1 * res.F_side1[j];
        }
        res.collar_resolved = inside >= 4;

        res.forcing = Eb - F;
        res.forcing.set_label("forcing");
        res.w = solve_dirichlet(res.forcing);
        res.v = res.w + B;
        res.v.set_label("v1e");

        Field rv = res.v;
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j) rv(i, j) *= r[j];
        res.drv = d_R(rv);
        res.drv.set_label("drv");
        res.v_omega = d_omega(res.v);

        res.u = Field::sample_radial(grid_, sc_.u1e_in, "u1e") -
                cumtrapz_omega(res.drv);

        // Pressure from the radial momentum balance, vanishing far out.
        Field G(grid_, 0.0);
        for (std::size_t i = 0; i < nw; ++i)
            for (std::size_t j = 0; j < nr; ++j)
                G(i, j) = (u0e_[j] / r[j]) *
                          (2.0 * res.u(i, j) - res.v_omega(i, j));
        bool warn = false;
        res.P = -1.0 * tail_integral_R(G, decay_tol_, &warn);
        res.P.set_label("P1e");
        res.decay_ok = !warn;

        // Running tails of u0e * (ray traces of F) for the collar part of
        // the angular momentum error.
        std::vector<double> g0(nr), g1(nr);
        for (std::size_t j = 0; j < nr; ++j) {
            g0[j] = u0e_[j] * res.F_side0[j];
            g1[j] = u0e_[j] * res.F_side1[j];
        }
        const auto c0 = cumtrapz_line(g0, r), c1 = cumtrapz_line(g1, r);
        res.tailF0.resize(nr), res.tailF1.resize(nr);
        for (std::size_t j = 0; j < nr; ++j) {
            res.tailF0[j] = c0.back() - c0[j];
            res.tailF1[j] = c1.back() - c1[j];
        }

        const Field wr = d_R(res.w), wo = d_omega(res.w);
        res.h1_energy = integrate_sector(hadamard(wr, wr), 1.0) +
                        integrate_sector(hadamard(wo, wo), -1.0) +
                        integrate_sector(hadamard(res.w, res.w), -1.0);
        res.forcing_mass =
            integrate_sector(hadamard(res.forcing, res.forcing), 1.0);
        res.h1_ratio =
            res.forcing_mass > 0.0 ? res.h1_energy / res.forcing_mass : 0.0;
        const double poincare = theta0_ / M_PI;
        res.h1_constant = res.h1_ratio / (poincare * poincare);

        for (std::size_t i = 0; i < nw; ++i) {
            res.trace_mismatch =
                std::max(res.trace_mismatch, std::abs(res.v(i, 0) + t_[i]));
            res.far_v = std::max(res.far_v, std::abs(res.v(i, nr - 1)));
            res.far_u = std::max(res.far_u, std::abs(res.u(i, nr - 1)));
        }
        return res;
    }

  private:
    void require_trace() const {
        if (t_.empty())
            throw std::logic_error("Euler1Solver: surface trace not set");
    }

    // Interior 5-point discretization, unknowns ordered r-fastest so the
    // matrix is banded along the radial direction.
    void factor() {
        const auto& wn = grid_->omega_nodes();
        const auto& r = grid_->r_nodes();
        const std::size_t nw = wn.size(), nr = r.size();
        const std::size_t mr = nr - 2;
        const auto N = Eigen::Index((nw - 2) * mr);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(N) * 5);
        for (std::size_t i = 1; i + 1 < nw; ++i) {
            const auto Wo = detail::fd_weights(wn[i], wn.data() + i - 1, 3, 2);
            for (std::size_t j = 1; j + 1 < nr; ++j) {
                const auto Wr =
                    detail::fd_weights(r[j], r.data() + j - 1, 3, 2);
                const auto row = Eigen::Index((i - 1) * mr + (j - 1));
                for (int k = 0; k < 3; ++k) {
                    const std::size_t jj = j - 1 + k;
                    double c = -r[j] * Wr[k][2] - 3.0 * Wr[k][1];
                    if (k == 1) c += a_[j] - 2.0 / r[j];
                    if (jj >= 1 && jj + 1 < nr)
                        trip.emplace_back(
                            row, Eigen::Index((i - 1) * mr + (jj - 1)), c);
                }
                for (int k = 0; k < 3; ++k) {
                    const std::size_t ii = i - 1 + k;
                    const double c = -Wo[k][2] / r[j];
                    if (ii >= 1 && ii + 1 < nw)
                        trip.emplace_back(
                            row, Eigen::Index((ii - 1) * mr + (j - 1)), c);
                }
            }
        }
        Eigen::SparseMatrix<double> A(N, N);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        lu_.compute(A);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error(
                "Euler1Solver: sparse factorization failed");
    }

    Scenario sc_;
    double theta0_, decay_tol_;
    Euler1Options opt_;
    GridPtr grid_;
    std::vector<double> s0_, s0r_, s0rr_, s1_, s1r_, s1rr_, a_, u0e_;
    std::vector<double> t_, t1_, t2_; // trace and angular derivatives
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

} // namespace sbl
