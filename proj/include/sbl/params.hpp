#pragma once

/// @file params.hpp
/// @brief Scalar parameter set shared by every solver and norm in the toolkit.

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbl {

/// All scalar knobs of the expansion and of the weighted norms.
///
/// The weight exponents are tied together: q = 1 + delta_prime, p is the
/// Holder conjugate of q, alpha must sit in [q/p, q*delta/2], and delta in
/// [1 - 1/(2p), 1). validate() enforces the whole ladder; solvers assume a
/// validated set.
struct ParameterSet {
    double eps = 1e-2;          // viscosity, > 0
    double theta0 = 0.1;        // sector angle in radians, > 0
    double R0 = 1.0;            // disk radius, > 0
    double delta = 0.92;        // weight exponent, [0,1)
    double gamma = 0.2;         // remainder amplitude exponent, (0, 1/4)
    double delta_prime = 0.25;  // high-regularity Holder perturbation, > 0
    double alpha = 0.4;         // u_R / v_R high-regularity weight
    double beta = 0.0;          // v_omega weight; 0 means "use default q/(2p)"
    double kappa = 0.05;        // rate slack eaten by log factors
    double R_max = 31.0;        // radial truncation, Prandtl units
    double decay_tol = 1e-8;    // tail magnitude treated as "decayed"

    double q() const { return 1.0 + delta_prime; }
    double p() const { return q() / (q() - 1.0); }
    /// Default v_omega weight q/(2p) unless overridden.
    double beta_eff() const { return beta > 0.0 ? beta : q() / (2.0 * p()); }
    double sqeps() const { return std::sqrt(eps); }

    void validate() const {
        auto fail = [](const std::string& what) {
            throw std::invalid_argument("ParameterSet: " + what);
        };
        if (!(eps > 0.0)) fail("eps must be > 0");
        if (!(theta0 > 0.0)) fail("theta0 must be > 0");
        if (!(R0 > 0.0)) fail("R0 must be > 0");
        if (!(gamma > 0.0 && gamma < 0.25)) fail("gamma must lie in (0, 1/4)");
        if (!(delta_prime > 0.0)) fail("delta_prime must be > 0");
        const double lo = 1.0 - 1.0 / (2.0 * p());
        if (!(delta >= lo && delta < 1.0))
            fail("delta must lie in [1 - 1/(2p), 1) = [" + std::to_string(lo) + ", 1)");
        if (!(alpha >= q() / p() - 1e-12 && alpha <= q() * delta / 2.0 + 1e-12))
            fail("alpha must lie in [q/p, q*delta/2]");
        if (!(R_max > R0)) fail("R_max must exceed R0");
        if (!(decay_tol > 0.0)) fail("decay_tol must be > 0");
    }
};

} // namespace sbl
