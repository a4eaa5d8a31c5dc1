#pragma once

/// @file norms.hpp
/// @brief Weighted norms on the sector: the anisotropic energy norms A, B,
///        X, the nonlinear-analysis norm Z with its six squared components,
///        weighted Lebesgue norms, and a homogeneous second-order seminorm.
///        All integrals are taken against r(R)^kappa dR domega with tensor
///        trapezoid weights.
///
/// Component layout of the squared Z norm (z_components in NormReport):
///   [0] int u^2 r^d + u_w^2 r^d + u_R^2 r^(1+d)            (equals X^2)
///   [1] int eps v_w^2 r^d + (d_R(r v))^2 r^d
///   [2] eps^g (int u_R^(2q) r^(q+a))^(1/q)
///   [3] eps^g (int v_R^(2q) r^(q+a))^(1/q)
///   [4] eps^g (int u_w^(2q))^(1/q)
///   [5] eps^(g+1) (int v_w^(2q) r^(-q/(2p)))^(1/q)

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "sbl/calculus.hpp"
#include "sbl/field.hpp"
#include "sbl/io.hpp"
#include "sbl/params.hpp"

namespace sbl {

/// (int |f|^p r^kappa dR domega)^(1/p).
inline double lp_star_norm(const Field& f, double p, double kappa) {
    Field a = f;
    a.transform([p](double x) { return std::pow(std::abs(x), p); });
    return std::pow(integrate_sector(a, kappa), 1.0 / p);
}

inline double l2_star_sq(const Field& f, double kappa) {
    return integrate_sector(hadamard(f, f), kappa);
}

/// ||u||_A^2 = int u_R^2 r^(1+d) + eps u_w^2 r^(-1+d) + eps u^2 r^(-1+d).
inline double norm_A_sq(const Field& u) {
    const auto& prm = u.grid()->params();
    const Field uR = d_R(u), uw = d_omega(u);
    return l2_star_sq(uR, 1.0 + prm.delta) +
           prm.eps * l2_star_sq(uw, -1.0 + prm.delta) +
           prm.eps * l2_star_sq(u, -1.0 + prm.delta);
}

namespace detail {
inline Field radial_momentum(const Field& v) { // d_R(r v)
    const auto& g = *v.grid();
    Field rv(v.grid());
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 0; j < g.n_R(); ++j) rv(i, j) = g.r(j) * v(i, j);
    return d_R(rv);
}
} // namespace detail

/// ||v||_B^2 = int r^d (d_R(r v))^2 + eps v_w^2 r^d + eps v^2 r^d.
inline double norm_B_sq(const Field& v) {
    const auto& prm = v.grid()->params();
    const Field drv = detail::radial_momentum(v), vw = d_omega(v);
    return l2_star_sq(drv, prm.delta) + prm.eps * l2_star_sq(vw, prm.delta) +
           prm.eps * l2_star_sq(v, prm.delta);
}

/// ||u||_X^2 = int u^2 r^d + u_w^2 r^d + u_R^2 r^(1+d).
inline double norm_X_sq(const Field& u) {
    const auto& prm = u.grid()->params();
    const Field uR = d_R(u), uw = d_omega(u);
    return l2_star_sq(u, prm.delta) + l2_star_sq(uw, prm.delta) +
           l2_star_sq(uR, 1.0 + prm.delta);
}

inline double norm_A(const Field& u) { return std::sqrt(norm_A_sq(u)); }
inline double norm_B(const Field& v) { return std::sqrt(norm_B_sq(v)); }
inline double norm_X(const Field& u) { return std::sqrt(norm_X_sq(u)); }

/// Homogeneous weighted second-order seminorm:
/// int ( u_ww^2 / r^4 + u_wR^2 / r^2 + u_RR^2 ) r^kappa.
inline double h2_star_seminorm_sq(const Field& u, double kappa) {
    const Field uww = d_omega_omega(u);
    const Field uwR = d_R(d_omega(u));
    const Field uRR = d_RR(u);
    return l2_star_sq(uww, kappa - 4.0) + l2_star_sq(uwR, kappa - 2.0) +
           l2_star_sq(uRR, kappa);
}

struct ZBreakdown {
    std::array<double, 6> components{}; // squared-norm contributions
    double total = 0.0;                 // sqrt of the component sum
};

inline ZBreakdown z_norm(const Field& u, const Field& v) {
    const auto& prm = u.grid()->params();
    const double q = prm.q(), p = prm.p();
    const Field uR = d_R(u), uw = d_omega(u);
    const Field vR = d_R(v), vw = d_omega(v);
    const Field drv = detail::radial_momentum(v);
    auto pow_int = [](const Field& f, double e, double kappa) {
        Field a = f;
        a.transform([e](double x) { return std::pow(std::abs(x), e); });
        return integrate_sector(a, kappa);
    };
    ZBreakdown z;
    z.components[0] = l2_star_sq(u, prm.delta) + l2_star_sq(uw, prm.delta) +
                      l2_star_sq(uR, 1.0 + prm.delta);
    z.components[1] =
        prm.eps * l2_star_sq(vw, prm.delta) + l2_star_sq(drv, prm.delta);
    const double g = std::pow(prm.eps, prm.gamma);
    z.components[2] =
        g * std::pow(pow_int(uR, 2.0 * q, q + prm.alpha), 1.0 / q);
    z.components[3] =
        g * std::pow(pow_int(vR, 2.0 * q, q + prm.alpha), 1.0 / q);
    z.components[4] = g * std::pow(pow_int(uw, 2.0 * q, 0.0), 1.0 / q);
    z.components[5] = g * prm.eps *
                      std::pow(pow_int(vw, 2.0 * q, -q / (2.0 * p)), 1.0 / q);
    double s = 0.0;
    for (double c : z.components) s += c;
    z.total = std::sqrt(s);
    return z;
}

/// Summary of the standard norms of a velocity pair, serializable to JSON.
struct NormReport {
    double norm_A = 0.0, norm_B = 0.0, norm_X = 0.0;
    double z_total = 0.0;
    std::array<double, 6> z_components{};
    std::map<std::string, double> lp_star; // keyed "p=<p>,delta=<kappa>"

    ordered_json to_json() const {
        ordered_json j;
        j["norm_A"] = norm_A;
        j["norm_B"] = norm_B;
        j["norm_X"] = norm_X;
        j["z_total"] = z_total;
        j["z_components"] = z_components;
        ordered_json lp = ordered_json::object();
        for (const auto& [k, val] : lp_star) lp[k] = val;
        j["lp_star"] = lp;
        return j;
    }
};

inline std::string lp_key(double p, double kappa) {
    // Short human-readable key; 12 significant digits is plenty for the
    // hand-picked parameter values that appear here.
    auto trim = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", x);
        return std::string(buf);
    };
    return "p=" + trim(p) + ",delta=" + trim(kappa);
}

/// Build the full report for a pair (u on the angular slot, v radial).
/// lp_requests lists (p, kappa) pairs evaluated on u.
inline NormReport make_norm_report(
    const Field& u, const Field& v,
    const std::vector<std::pair<double, double>>& lp_requests = {}) {
    NormReport rep;
    rep.norm_A = norm_A(u);
    rep.norm_B = norm_B(v);
    rep.norm_X = norm_X(u);
    const ZBreakdown z = z_norm(u, v);
    rep.z_total = z.total;
    rep.z_components = z.components;
    const double d = u.grid()->params().delta;
    std::vector<std::pair<double, double>> req = lp_requests;
    if (req.empty()) req = {{2.0, d}, {4.0, d}};
    for (auto [p, kappa] : req)
        rep.lp_star[lp_key(p, kappa)] = lp_star_norm(u, p, kappa);
    return rep;
}

} // namespace sbl
