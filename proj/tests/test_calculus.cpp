#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sbl/calculus.hpp"
#include "sbl/cutoff.hpp"
#include "sbl/grid.hpp"
#include "sbl/interp.hpp"
#include "sbl/io.hpp"
#include "sbl/params.hpp"
#include "sbl/tridiag.hpp"

using namespace sbl;

namespace {

ParameterSet base_params() {
    ParameterSet prm;
    prm.eps = 4.0e-2; // sqrt(eps) = 0.2, handy for hand checks
    prm.R_max = 31.0;
    return prm;
}

GridPtr uniform_grid(std::size_t no, std::size_t nr) {
    return build_grid(base_params(), no, nr, StretchSpec::uniform(),
                      StretchSpec::uniform());
}

} // namespace

TEST_CASE("radial map: scaled and physical coordinates round trip") {
    ParameterSet prm = base_params();
    // Hand value: r = R0 + sqrt(eps) (R - R0) = 1 + 0.2 * 5 = 2.
    REQUIRE(r_of_R(6.0, prm) == Catch::Approx(2.0).margin(1e-15));
    for (double r : {1.0, 1.3, 2.7, 19.5}) {
        REQUIRE(r_of_R(R_of_r(r, prm), prm) == Catch::Approx(r).margin(1e-14));
    }
    REQUIRE_THROWS_AS(R_of_r(0.5, prm), std::domain_error);
}

TEST_CASE("parameter validation rejects out-of-range exponents") {
    ParameterSet prm = base_params();
    REQUIRE_NOTHROW(prm.validate());
    ParameterSet bad = prm;
    bad.gamma = 0.3; // admissible range is (0, 1/4)
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = prm;
    bad.delta = 0.5; // below 1 - 1/(2p) for the default conjugate pair
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = prm;
    bad.alpha = 10.0; // above q * delta / 2
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("axis builders: uniform, one-sided and symmetric clustering") {
    ParameterSet prm = base_params();

    SECTION("uniform endpoints and midpoint exact") {
        auto g = build_grid(prm, 3, 3, StretchSpec::uniform(),
                            StretchSpec::uniform());
        REQUIRE(g->R(0) == 1.0);
        REQUIRE(g->R(1) == Catch::Approx(16.0).margin(1e-13));
        REQUIRE(g->R(2) == 31.0);
    }

    SECTION("clustering factor 1 reduces to uniform") {
        auto gu = build_grid(prm, 9, 5, StretchSpec::uniform(),
                             StretchSpec::uniform());
        auto gc = build_grid(prm, 9, 5, StretchSpec::near_lo(1.0),
                             StretchSpec::uniform());
        for (std::size_t i = 0; i < 9; ++i)
            REQUIRE(gc->omega(i) == Catch::Approx(gu->omega(i)).margin(1e-13));
    }

    SECTION("near_lo spacing ratio matches the exponential map") {
        // Map (c^s - 1)/(c - 1) gives last/first spacing = c^(1-h) exactly.
        const std::size_t n = 21;
        const double h = 1.0 / double(n - 1);
        auto g = build_grid(prm, 3, n, StretchSpec::uniform(),
                            StretchSpec::near_lo(4.0));
        const double first = g->R(1) - g->R(0);
        const double last = g->R(n - 1) - g->R(n - 2);
        REQUIRE(last / first ==
                Catch::Approx(std::pow(4.0, 1.0 - h)).epsilon(1e-10));
    }

    SECTION("two_sided axis is symmetric with a wider middle") {
        const std::size_t n = 17;
        auto g = build_grid(prm, n, 3, StretchSpec::two_sided(6.0),
                            StretchSpec::uniform());
        const double lo = g->omega(0), hi = g->omega(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(g->omega(i) + g->omega(n - 1 - i) ==
                    Catch::Approx(lo + hi).margin(1e-13));
        REQUIRE(g->omega(1) - g->omega(0) <
                g->omega(n / 2 + 1) - g->omega(n / 2));
    }

    SECTION("half_mass puts the median node at the inner width") {
        const std::size_t n = 41;
        auto g = build_grid(prm, 3, n, StretchSpec::uniform(),
                            StretchSpec::half_mass(5.0));
        REQUIRE(g->R((n - 1) / 2) == Catch::Approx(1.0 + 5.0).margin(1e-8));
        REQUIRE(g->R(0) == 1.0);
        REQUIRE(g->R(n - 1) == 31.0);
    }
}

TEST_CASE("derivatives: polynomial exactness including boundaries") {
    // Non-uniform axis to exercise the unequal-spacing weights.
    ParameterSet prm = base_params();
    auto g = build_grid(prm, 5, 33, StretchSpec::uniform(),
                        StretchSpec::near_lo(3.0));

    SECTION("first derivative exact on linears") {
        Field f = Field::sample(g, [](double w, double R) { return 2.0 + 0.7 * w - 3.0 * R; });
        Field fw = d_omega(f), fR = d_R(f);
        for (std::size_t i = 0; i < g->n_omega(); ++i)
            for (std::size_t j = 0; j < g->n_R(); ++j) {
                REQUIRE(fw(i, j) == Catch::Approx(0.7).margin(1e-11));
                REQUIRE(fR(i, j) == Catch::Approx(-3.0).margin(1e-10));
            }
    }

    SECTION("second derivative exact on cubics at one-sided ends") {
        Field f = Field::sample(g, [](double, double R) { return R * R * R; });
        Field fRR = d_RR(f);
        for (std::size_t j : {std::size_t(0), g->n_R() - 1})
            REQUIRE(fRR(0, j) == Catch::Approx(6.0 * g->R(j)).epsilon(1e-8));
    }
}

TEST_CASE("derivatives: second-order convergence on smooth data") {
    auto err_at = [](std::size_t n) {
        auto g = uniform_grid(3, n);
        Field f = Field::sample(g, [](double, double R) { return std::sin(0.5 * R); });
        Field fR = d_R(f);
        double worst = 0.0;
        for (std::size_t j = 0; j < g->n_R(); ++j)
            worst = std::max(worst, std::abs(fR(0, j) - 0.5 * std::cos(0.5 * g->R(j))));
        return worst;
    };
    const double e1 = err_at(65), e2 = err_at(129);
    const double rate = std::log2(e1 / e2);
    REQUIRE(rate > 1.7);
    REQUIRE(rate < 2.3);
}

TEST_CASE("quadrature: weights, cumulative and tail integrals") {
    auto g = uniform_grid(5, 2001);

    SECTION("trapezoid weights sum to the interval length") {
        auto w = trapz_weights(g->R_nodes());
        double s = 0.0;
        for (double x : w) s += x;
        REQUIRE(s == Catch::Approx(30.0).epsilon(1e-13));
    }

    SECTION("tail integral of exp(-(R-R0)) matches the closed form") {
        Field f = Field::sample(g, [](double, double R) { return std::exp(-(R - 1.0)); });
        bool warn = true;
        Field T = tail_integral_R(f, 1e-8, &warn);
        REQUIRE(!warn); // exp(-30) ~ 9e-14 is below the decay gate
        // Trapezoid relative error for exp decay is h^2/12 ~ 1.9e-5 here.
        for (std::size_t j = 0; j < g->n_R(); j += 200) {
            const double exact = std::exp(-(g->R(j) - 1.0)) - std::exp(-30.0);
            REQUIRE(T(0, j) == Catch::Approx(exact).margin(5e-5));
        }
        REQUIRE(T(0, g->n_R() - 1) == 0.0);
    }

    SECTION("decay warning fires when the integrand has a fat tail") {
        Field f = Field::sample(g, [](double, double R) { return 1.0 / R; });
        bool warn = false;
        tail_integral_R(f, 1e-8, &warn);
        REQUIRE(warn);
    }

    SECTION("tail integral inverts midpoint differencing to machine precision") {
        Field f = Field::sample(g, [](double w, double R) {
            return std::cos(3.0 * w) * std::exp(-0.3 * (R - 1.0));
        });
        Field T = tail_integral_R(f);
        REQUIRE(midpoint_tail_defect_R(T, f) < 1e-13);
    }

    SECTION("sector integral with a radial weight") {
        // int_0^theta0 int_1^31 exp(-(R-1)) r dR domega, r = 1 + 0.2 (R-1):
        // radial part = int exp(-s)(1 + 0.2 s) ds = 1.2 - 7.2 exp(-30).
        Field f = Field::sample(g, [](double, double R) { return std::exp(-(R - 1.0)); });
        const double got = integrate_sector(f, 1.0);
        REQUIRE(got == Catch::Approx(0.1 * 1.2).epsilon(1e-4));
    }
}

TEST_CASE("cumulative omega integral inverts midpoint differencing") {
    auto g = uniform_grid(41, 17);
    Field X = Field::sample(g, [](double w, double R) {
        return std::sin(5.0 * w) + 0.1 * R;
    });
    Field u0 = Field::sample(g, [](double, double R) { return std::exp(-R); });
    Field u = u0 - cumtrapz_omega(X);
    REQUIRE(midpoint_cum_defect_omega(u, X) < 1e-13);
}

TEST_CASE("stream-function velocities are divergence free to roundoff") {
    ParameterSet prm = base_params();
    auto g = build_grid(prm, 33, 49, StretchSpec::two_sided(4.0),
                        StretchSpec::near_lo(3.0));
    Field psi = Field::sample(g, [](double w, double R) {
        return std::sin(2.0 * w + 0.3) * std::exp(-0.5 * (R - 1.0));
    });
    auto [u, v] = velocity_from_stream(psi);
    Field div = divergence_nodal(u, v);
    REQUIRE(div.max_abs() < 1e-12);
}

TEST_CASE("tridiagonal solve reproduces a manufactured solution") {
    const std::size_t n = 50;
    std::vector<double> lower(n, 1.0), diag(n, 4.0), upper(n, 1.0);
    std::vector<double> xstar(n), rhs(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) xstar[k] = std::sin(0.1 * double(k));
    for (std::size_t k = 0; k < n; ++k) {
        rhs[k] = 4.0 * xstar[k];
        if (k > 0) rhs[k] += xstar[k - 1];
        if (k + 1 < n) rhs[k] += xstar[k + 1];
    }
    solve_tridiag(lower, diag, upper, rhs);
    for (std::size_t k = 0; k < n; ++k)
        REQUIRE(rhs[k] == Catch::Approx(xstar[k]).margin(1e-13));
}

TEST_CASE("monotone interpolation: no overshoot, linears exact") {
    SECTION("monotone data stays within bounds") {
        std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
        std::vector<double> y{0.0, 0.1, 0.2, 3.0, 3.1}; // steep middle step
        Pchip p(x, y);
        for (double xq = 0.0; xq <= 4.0; xq += 0.01) {
            REQUIRE(p(xq) >= -1e-12);
            REQUIRE(p(xq) <= 3.1 + 1e-12);
        }
        for (double xq = 0.05; xq <= 4.0; xq += 0.05)
            REQUIRE(p(xq) >= p(xq - 0.05) - 1e-12);
    }

    SECTION("smooth data interpolated to third order") {
        std::vector<double> x, y;
        for (int k = 0; k <= 40; ++k) {
            x.push_back(0.1 * k);
            y.push_back(std::exp(-x.back()));
        }
        Pchip p(x, y);
        double worst = 0.0;
        for (double xq = 0.0; xq <= 4.0; xq += 0.003)
            worst = std::max(worst, std::abs(p(xq) - std::exp(-xq)));
        REQUIRE(worst < 2e-3);
    }

    SECTION("field resample reproduces bilinear data") {
        ParameterSet prm = base_params();
        auto gs = build_grid(prm, 11, 13, StretchSpec::uniform(),
                             StretchSpec::near_lo(2.0));
        auto gd = build_grid(prm, 23, 29, StretchSpec::two_sided(3.0),
                             StretchSpec::uniform());
        Field f = Field::sample(gs, [](double w, double R) {
            return 1.0 + 2.0 * w - 0.25 * R;
        });
        Field r = resample(f, gd);
        Field want = Field::sample(gd, [](double w, double R) {
            return 1.0 + 2.0 * w - 0.25 * R;
        });
        REQUIRE((r - want).max_abs() < 1e-12);
    }
}

TEST_CASE("cutoff windows: plateau, support and analytic derivatives") {
    CutoffWindow chi = CutoffWindow::layer();
    REQUIRE(chi(0.0) == 1.0);
    REQUIRE(chi(1.0) == 1.0);
    REQUIRE(chi(1.5) == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(chi(2.0) == 0.0);
    REQUIRE(chi(5.0) == 0.0);
    REQUIRE(chi.deriv(0.7) == 0.0);
    REQUIRE(chi.deriv(2.3) == 0.0);

    // Analytic derivatives agree with central differences inside the blend.
    // h = 1e-5 balances truncation against roundoff in the second difference.
    for (double s : {1.1, 1.4, 1.75, 1.9}) {
        const double h = 1e-5;
        const double fd1 = (chi(s + h) - chi(s - h)) / (2.0 * h);
        const double fd2 = (chi(s + h) - 2.0 * chi(s) + chi(s - h)) / (h * h);
        REQUIRE(chi.deriv(s) == Catch::Approx(fd1).margin(1e-8));
        REQUIRE(chi.deriv2(s) == Catch::Approx(fd2).margin(1e-4));
    }

    // C^1 across the junctions.
    REQUIRE(std::abs(chi.deriv(1.0 + 1e-9)) < 1e-7);
    REQUIRE(std::abs(chi.deriv(2.0 - 1e-9)) < 1e-7);

    CutoffWindow collar = CutoffWindow::collar();
    REQUIRE(collar(0.5) == 1.0);
    REQUIRE(collar(1.0) == 0.0);
}

TEST_CASE("snapshot files are deterministic and round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "sbl_io_test";
    fs::create_directories(dir);
    auto g = uniform_grid(4, 5);
    Field f = Field::sample(g, [](double w, double R) {
        return std::sin(w) * std::exp(-R) + 1.0 / 3.0;
    });

    write_snapshot(dir / "a.csv", f);
    write_snapshot(dir / "b.csv", f);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    REQUIRE(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

    auto d = read_snapshot(dir / "a.csv");
    REQUIRE(d.value.size() == 20);
    // omega-major ordering: row k = (i, j) with k = i * n_R + j.
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            const std::size_t k = i * 5 + j;
            REQUIRE(d.omega[k] == g->omega(i));
            REQUIRE(d.R[k] == g->R(j));
            REQUIRE(d.r[k] == g->r(j));
            REQUIRE(d.value[k] == f(i, j)); // %.17g round trips exactly
        }
    fs::remove_all(dir);
}
