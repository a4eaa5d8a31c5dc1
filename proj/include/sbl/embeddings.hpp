#pragma once

/// @file embeddings.hpp
/// @brief Numerical checks of the weighted Sobolev-style inequalities the
///        nonlinear argument rests on, plus a seeded generator of admissible
///        velocity pairs (divergence free, no-slip on three sides,
///        stress-free on the outflow side) used to probe them.
///
/// Each check returns LHS, RHS and their ratio; the inequalities claim
/// ratio <= C with C independent of eps, so the observable is the
/// stability of the worst ratio across eps, not its absolute size.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sbl/calculus.hpp"
#include "sbl/cutoff.hpp"
#include "sbl/norms.hpp"

namespace sbl {

struct EmbeddingResult {
    std::string kind;
    double lhs = 0.0, rhs = 0.0;
    double ratio() const { return (rhs == 0.0) ? 0.0 : lhs / rhs; }
};

struct AdmissiblePair {
    Field u, v;
};

namespace detail {

/// Portable uniform double in [lo, hi) from a seeded engine.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double x = double(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * x;
}

} // namespace detail

/// Random stream function whose curl satisfies every boundary condition of
/// the remainder problem: the angular factor has a double zero at omega = 0
/// and a triple zero at omega = theta0 (so the stress-free condition holds
/// term by term), the radial factor has a double zero at R0 and is smoothly
/// windowed to zero before R_max.
inline Field random_stream(GridPtr grid, std::uint64_t seed) {
    const auto& prm = grid->params();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    const CutoffWindow win = CutoffWindow::layer();
    const double S = prm.R_max - prm.R0;
    struct Mode {
        double c, a, lam, mu, phi;
    };
    std::vector<Mode> modes(3);
    for (auto& m : modes) {
        m.c = detail::uniform(rng, -1.0, 1.0);
        m.a = detail::uniform(rng, -0.5, 0.5);
        m.lam = detail::uniform(rng, 0.4, 1.6);
        m.mu = detail::uniform(rng, 0.5, 3.0);
        m.phi = detail::uniform(rng, 0.0, 6.283185307179586);
    }
    return Field::sample(grid, [&](double w, double R) {
        const double wh = w / prm.theta0;
        const double s = R - prm.R0;
        const double window = win(2.0 * s / S);
        double acc = 0.0;
        for (const auto& m : modes) {
            const double A =
                wh * wh * std::pow(1.0 - wh, 3) * (1.0 + m.a * wh);
            const double B = s * s * std::exp(-m.lam * s) *
                             std::sin(m.mu * s + m.phi) * window;
            acc += m.c * A * B;
        }
        return acc;
    });
}

inline AdmissiblePair random_admissible_pair(GridPtr grid,
                                             std::uint64_t seed) {
    Field psi = random_stream(grid, seed);
    auto [u, v] = velocity_from_stream(psi);
    return {std::move(u), std::move(v)};
}

/// All seven inequality checks for one admissible pair.
inline std::vector<EmbeddingResult> check_embeddings(const Field& u,
                                                     const Field& v) {
    const auto& prm = u.grid()->params();
    const double eps = prm.eps, d = prm.delta, q = prm.q(), p = prm.p();
    const double beta = prm.beta_eff();
    std::vector<EmbeddingResult> out;

    const double Xu = norm_X(u);
    const double Bv = norm_B(v);
    const double H2u = std::sqrt(h2_star_seminorm_sq(u, 2.0 + d));
    const double H2v = std::sqrt(h2_star_seminorm_sq(v, 2.0 + d));
    const ZBreakdown z = z_norm(u, v);

    // sqrt(eps) (int v^p r^(p/2 - 1 + d p/2))^(1/p) <= C ||v||_B at p = 4.
    {
        const double P = 4.0;
        out.push_back({"v_lowreg",
                       std::sqrt(eps) *
                           lp_star_norm(v, P, P / 2.0 - 1.0 + d * P / 2.0),
                       Bv});
    }
    // (int u^p r^(d p/2 + 1/2))^(1/p) <= C ||u||_X at p = 4.
    {
        const double P = 4.0;
        out.push_back(
            {"u_lowreg", lp_star_norm(u, P, d * P / 2.0 + 0.5), Xu});
    }
    // eps^(g/2 + 1/(4q)) |u|_inf + eps^(g/2 + 1/(4q) + 1/2) |v|_inf <= C Z.
    {
        const double e1 = std::pow(eps, prm.gamma / 2.0 + 1.0 / (4.0 * q));
        out.push_back(
            {"linf", e1 * u.max_abs() + e1 * std::sqrt(eps) * v.max_abs(),
             z.total});
    }
    // ||u_R||_{L4, 2 + 2a/q} <= C ||u||_X^(1/2) ||u||_{H2,2+d}^(1/2).
    {
        out.push_back({"uR_L4",
                       lp_star_norm(d_R(u), 4.0, 2.0 + 2.0 * prm.alpha / q),
                       std::sqrt(Xu * H2u)});
    }
    // ||u_w||_{L4, 0} <= C ||u||_X^(1/2) ||u||_{H2,2+d}^(1/2).
    {
        out.push_back(
            {"uomega_L4", lp_star_norm(d_omega(u), 4.0, 0.0),
             std::sqrt(Xu * H2u)});
    }
    // sqrt(eps) ||v_w||_{L4, -2b/q} <= C ||v||_B^(1/2) ||v||_{H2,2+d}^(1/2).
    {
        out.push_back({"vomega_L4",
                       std::sqrt(eps) *
                           lp_star_norm(d_omega(v), 4.0, -2.0 * beta / q),
                       std::sqrt(Bv * H2v)});
    }
    // ||u v||_{L1,d} <= ||u||_{Lp,d} ||v||_{Lq,d} for conjugate (p, q).
    {
        out.push_back({"holder", lp_star_norm(hadamard(u, v), 1.0, d),
                       lp_star_norm(u, p, d) * lp_star_norm(v, q, d)});
    }
    return out;
}

} // namespace sbl
