#pragma once

/// @file scenario.hpp
/// @brief Problem data bundles: the outer shear flow, the slip speed at the
///        disk surface, inflow profiles for both layer corrections, and the
///        radial shapes of the side boundary data. Functions of r carry
///        analytic first and second derivatives because the outer solves
///        and the defect evaluations need them without differencing noise.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace sbl {

using RadialFn = std::function<double(double)>;

struct Scenario {
    std::string name;
    double u_b = 1.0; // angular slip speed at the disk surface

    // Outer shear flow of r with derivatives.
    RadialFn u0e, u0e_r, u0e_rr;

    // Inflow data: ubar0/ubar1 are functions of R (layer corrections),
    // u1e_in is the inflow trace of the order-one outer correction, of r.
    RadialFn ubar0, ubar1, u1e_in, u1e_in_r;

    // Side boundary shapes for the order-one outer problem, normalized to 1
    // at r = R0; the amplitude is set by the layer trace at the surface.
    RadialFn shape0, shape0_r, shape0_rr;
    RadialFn shape1, shape1_r, shape1_rr;

    double c0_hint = 1.0; // min(u_b, inf(u0e(R0) + ubar0)) for convenience
};

/// Smooth decaying data with an order-one outer shear; every trace is
/// corner-compatible so the marches start without an initial layer.
inline Scenario default_scenario(double R0, double theta0) {
    Scenario sc;
    sc.name = "default";
    sc.u_b = 1.0;
    sc.u0e = [R0](double r) { return 1.0 + 0.5 * std::exp(-(r - R0)); };
    sc.u0e_r = [R0](double r) { return -0.5 * std::exp(-(r - R0)); };
    sc.u0e_rr = [R0](double r) { return 0.5 * std::exp(-(r - R0)); };
    sc.ubar0 = [R0](double R) { return -0.5 * std::exp(-(R - R0)); };
    sc.ubar1 = [R0](double R) { return -0.3 * std::exp(-(R - R0)); };
    sc.u1e_in = [R0](double r) { return 0.3 * std::exp(-(r - R0)); };
    sc.u1e_in_r = [R0](double r) { return -0.3 * std::exp(-(r - R0)); };
    sc.shape0 = [R0](double r) { return std::exp(-(r - R0)); };
    sc.shape0_r = [R0](double r) { return -std::exp(-(r - R0)); };
    sc.shape0_rr = [R0](double r) { return std::exp(-(r - R0)); };
    // The two side shapes differ by O(theta0) so the outer corrector stays
    // within the smallness regime the estimates assume.
    const double lam = 1.0 + 0.5 * theta0;
    sc.shape1 = [R0, lam](double r) { return std::exp(-lam * (r - R0)); };
    sc.shape1_r = [R0, lam](double r) {
        return -lam * std::exp(-lam * (r - R0));
    };
    sc.shape1_rr = [R0, lam](double r) {
        return lam * lam * std::exp(-lam * (r - R0));
    };
    sc.c0_hint = 1.0;
    return sc;
}

/// Uniform stream with no inflow deficits: every layer correction must
/// vanish identically, which pins down spurious generation in the solvers.
inline Scenario trivial_scenario(double R0, double theta0) {
    Scenario sc;
    sc.name = "trivial";
    sc.u_b = 1.0;
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    sc.u0e = one;
    sc.u0e_r = zero;
    sc.u0e_rr = zero;
    sc.ubar0 = zero;
    sc.ubar1 = zero;
    sc.u1e_in = zero;
    sc.u1e_in_r = zero;
    sc.shape0 = [R0](double r) { return std::exp(-(r - R0)); };
    sc.shape0_r = [R0](double r) { return -std::exp(-(r - R0)); };
    sc.shape0_rr = [R0](double r) { return std::exp(-(r - R0)); };
    const double lam = 1.0 + 0.5 * theta0;
    sc.shape1 = [R0, lam](double r) { return std::exp(-lam * (r - R0)); };
    sc.shape1_r = [R0, lam](double r) {
        return -lam * std::exp(-lam * (r - R0));
    };
    sc.shape1_rr = [R0, lam](double r) {
        return lam * lam * std::exp(-lam * (r - R0));
    };
    sc.c0_hint = 1.0;
    return sc;
}

inline Scenario make_scenario(const std::string& name, double R0,
                              double theta0) {
    if (name == "default") return default_scenario(R0, theta0);
    if (name == "trivial") return trivial_scenario(R0, theta0);
    throw std::invalid_argument("unknown scenario: " + name);
}

} // namespace sbl
