#pragma once

/// @file cutoff.hpp
/// @brief Smooth cutoff windows with analytic derivatives. Built from the
///        quintic smoothstep so the windows are C^2 across the junctions;
///        the truncation identities differentiate the window twice through
///        product rules, so anything less smooth would leave kinks in the
///        forcing terms.

#include <cmath>
#include <stdexcept>

namespace sbl {

namespace detail {
inline double smoothstep5(double t) {
    return ((6.0 * t - 15.0) * t + 10.0) * t * t * t;
}
inline double smoothstep5_d(double t) {
    return ((30.0 * t - 60.0) * t + 30.0) * t * t;
}
inline double smoothstep5_dd(double t) {
    return ((120.0 * t - 180.0) * t + 60.0) * t;
}
} // namespace detail

/// Monotone window: 1 on [0, plateau], 0 on [support, inf), quintic blend
/// in between. Evaluated for s >= 0 (callers pass scaled distances).
class CutoffWindow {
  public:
    CutoffWindow(double plateau, double support)
        : a_(plateau), b_(support) {
        if (!(0.0 <= a_ && a_ < b_))
            throw std::invalid_argument("CutoffWindow: need 0 <= plateau < support");
    }

    /// Window truncating layer profiles: identically 1 on [0,1], gone by 2.
    static CutoffWindow layer() { return CutoffWindow(1.0, 2.0); }
    /// Window for boundary collars: identically 1 on [0,1/2], gone by 1.
    static CutoffWindow collar() { return CutoffWindow(0.5, 1.0); }

    double plateau() const { return a_; }
    double support() const { return b_; }

    double operator()(double s) const {
        if (s <= a_) return 1.0;
        if (s >= b_) return 0.0;
        return 1.0 - detail::smoothstep5((s - a_) / (b_ - a_));
    }

    double deriv(double s) const {
        if (s <= a_ || s >= b_) return 0.0;
        return -detail::smoothstep5_d((s - a_) / (b_ - a_)) / (b_ - a_);
    }

    double deriv2(double s) const {
        if (s <= a_ || s >= b_) return 0.0;
        const double w = b_ - a_;
        return -detail::smoothstep5_dd((s - a_) / w) / (w * w);
    }

  private:
    double a_, b_;
};

} // namespace sbl
