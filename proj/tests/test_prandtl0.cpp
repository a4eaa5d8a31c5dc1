#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sbl/calculus.hpp"
#include "sbl/prandtl0.hpp"

using namespace sbl;

namespace {

ParameterSet layer_params() {
    ParameterSet prm;
    prm.eps = 1e-2;
    prm.theta0 = 0.1;
    prm.R_max = 31.0;
    return prm;
}

GridPtr eval_grid(std::size_t no = 49, std::size_t nr = 129) {
    return build_grid(layer_params(), no, nr, StretchSpec::uniform(),
                      StretchSpec::half_mass(5.0));
}

// Manufactured solution in the transformed frame:
//   alpha*(w, eta) = u_e + c(w) B(eta),  B = eta exp(-eta),  c = 0.2 + 0.1 w.
// The required source is S = c' B - R0 [u_e c B'' + c^2 (B'^2 + B B'')].
struct Manufactured {
    double u_e = 1.5, R0 = 1.0;
    static double B(double s) { return s * std::exp(-s); }
    static double Bp(double s) { return (1.0 - s) * std::exp(-s); }
    static double Bpp(double s) { return (s - 2.0) * std::exp(-s); }
    static double c(double w) { return 0.2 + 0.1 * w; }
    double alpha(double w, double s) const { return u_e + c(w) * B(s); }
    double source(double w, double s) const {
        const double cc = c(w);
        return 0.1 * B(s) -
               R0 * (u_e * cc * Bpp(s) +
                     cc * cc * (Bp(s) * Bp(s) + B(s) * Bpp(s)));
    }
};

// Independent reconstruction of the layer velocity on the physical axis:
// integrate dR/deta = 1/alpha* with fine trapezoids, then invert.
std::vector<double> manufactured_u_of_R(const Manufactured& m, double w,
                                        const std::vector<double>& Rq,
                                        double eta_max) {
    const std::size_t n = 20001;
    std::vector<double> eta(n), inv(n), up(n);
    for (std::size_t j = 0; j < n; ++j) {
        eta[j] = eta_max * double(j) / double(n - 1);
        inv[j] = 1.0 / m.alpha(w, eta[j]);
        up[j] = m.alpha(w, eta[j]) - m.u_e;
    }
    auto Rnodes = cumtrapz_line(inv, eta);
    for (auto& x : Rnodes) x += m.R0;
    return pchip_resample(Rnodes, up, Rq);
}

} // namespace

TEST_CASE("manufactured solution: march reproduces the transformed field") {
    Manufactured m;
    Scenario sc = default_scenario(1.0, 0.1);
    sc.u_b = m.u_e; // wall value of the manufactured profile

    auto run = [&](std::size_t n_eta) {
        Prandtl0Options opt;
        opt.n_eta = n_eta;
        opt.n_omega_march = 513;
        opt.eta_max_override = 20.0;
        opt.alpha0_eta = [&](double s) { return m.alpha(0.0, s); };
        opt.source = [&](double w, double s) { return m.source(w, s); };
        auto g = eval_grid(9, 97);
        Prandtl0Result res = solve_prandtl0(sc, g, opt);
        // Compare the final angle row against the independent reconstruction
        // on radii the transformed domain covers comfortably.
        std::vector<double> Rq;
        for (std::size_t j = 0; j < g->n_R() && g->R(j) < 12.0; ++j)
            Rq.push_back(g->R(j));
        auto want = manufactured_u_of_R(m, 0.1, Rq, 20.0);
        double worst = 0.0;
        for (std::size_t j = 0; j < Rq.size(); ++j)
            worst = std::max(worst,
                             std::abs(res.u(g->n_omega() - 1, j) - want[j]));
        return worst;
    };

    const double e_coarse = run(257), e_fine = run(513);
    REQUIRE(e_coarse < 2e-3);
    REQUIRE(e_fine < 1e-3);
    REQUIRE(std::log2(e_coarse / e_fine) > 1.2); // second-order interior
}

TEST_CASE("uniform data produce no layer at all") {
    Scenario sc = trivial_scenario(1.0, 0.1);
    Prandtl0Options opt;
    opt.n_eta = 257;
    opt.n_omega_march = 257;
    Prandtl0Result res = solve_prandtl0(sc, eval_grid(), opt);
    REQUIRE(res.u.max_abs() <= 1e-10);
    REQUIRE(res.v.max_abs() <= 1e-10);
    REQUIRE(res.min_alpha == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(res.c0 == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(res.decay_ok);
}

TEST_CASE("default data: barrier, traces, decay and divergence identity") {
    Scenario sc = default_scenario(1.0, 0.1);
    Prandtl0Options opt;
    opt.n_eta = 513;
    opt.n_omega_march = 513;
    auto g = eval_grid();
    Prandtl0Result res = solve_prandtl0(sc, g, opt);

    SECTION("positivity barrier from the minimum principle") {
        REQUIRE(res.c0 == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(res.min_alpha >= res.c0 - 1e-8);
    }

    SECTION("wall and inflow traces") {
        for (std::size_t i = 0; i < g->n_omega(); ++i)
            REQUIRE(res.u(i, 0) ==
                    Catch::Approx(sc.u_b - res.u_e).margin(1e-9));
        for (std::size_t j = 0; j < g->n_R(); ++j)
            REQUIRE(res.u(0, j) ==
                    Catch::Approx(sc.ubar0(g->R(j))).margin(2e-4));
    }

    SECTION("far-field decay") {
        REQUIRE(res.decay_ok);
        REQUIRE(res.tail_max_u < 1e-10);
        REQUIRE(res.tail_max_v < 1e-6);
    }

    SECTION("radial velocity satisfies the discrete divergence identity") {
        Field rv(g);
        for (std::size_t i = 0; i < g->n_omega(); ++i)
            for (std::size_t j = 0; j < g->n_R(); ++j)
                rv(i, j) = g->r(j) * res.v(i, j);
        REQUIRE(midpoint_tail_defect_R(rv, res.u_omega) < 1e-12);
    }

    SECTION("the layer pumps fluid off the surface") {
        REQUIRE(std::abs(res.v(g->n_omega() / 2, 0)) > 1e-4);
    }

    SECTION("march effort stays modest") {
        REQUIRE(res.max_picard_sweeps <= 6);
    }
}

TEST_CASE("solves are deterministic") {
    Scenario sc = default_scenario(1.0, 0.1);
    Prandtl0Options opt;
    opt.n_eta = 257;
    opt.n_omega_march = 129;
    auto g = eval_grid(17, 65);
    Prandtl0Result a = solve_prandtl0(sc, g, opt);
    Prandtl0Result b = solve_prandtl0(sc, g, opt);
    REQUIRE((a.u - b.u).max_abs() == 0.0);
    REQUIRE((a.v - b.v).max_abs() == 0.0);
    REQUIRE(a.diagnostics().dump() == b.diagnostics().dump());
}
