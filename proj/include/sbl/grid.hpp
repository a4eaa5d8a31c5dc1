#pragma once

/// @file grid.hpp
/// @brief Annular-sector tensor grid in (omega, R) with the Prandtl/Euler
///        radial scaling r = R0 + sqrt(eps) (R - R0).
///
/// The grid owns three node arrays: omega in [0, theta0], R in [R0, R_max],
/// and the derived r image of the R nodes. Node arrays are immutable after
/// construction; everything downstream holds grids by shared_ptr.

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sbl/params.hpp"

namespace sbl {

/// Euler radial coordinate of a Prandtl coordinate. Domain: R >= R0.
inline double r_of_R(double R, const ParameterSet& prm) {
    if (R < prm.R0 - 1e-12)
        throw std::domain_error("r_of_R: R below the disk radius R0");
    return prm.R0 + prm.sqeps() * (R - prm.R0);
}

/// Inverse of r_of_R. Domain: r >= R0.
inline double R_of_r(double r, const ParameterSet& prm) {
    if (r < prm.R0 - 1e-12)
        throw std::domain_error("R_of_r: r below the disk radius R0");
    return prm.R0 + (r - prm.R0) / prm.sqeps();
}

/// How to distribute nodes along one axis.
///
/// - uniform: constant spacing.
/// - tanh_near_lo: spacing grows smoothly away from the lower end;
///   `cluster` is the ratio of last to first spacing (1 reduces to uniform).
/// - tanh_two_sided: symmetric clustering at both ends with interior
///   spacing up to `cluster` times the end spacing.
/// - tanh_half_mass: half the nodes inside [lo, lo + inner_width], the rest
///   smoothly stretched to hi. Default radial choice for exponentially
///   decaying layers.
struct StretchSpec {
    enum class Kind { uniform, tanh_near_lo, tanh_two_sided, tanh_half_mass };
    Kind kind = Kind::uniform;
    double cluster = 1.0;
    double inner_width = 5.0;

    static StretchSpec uniform() { return {}; }
    static StretchSpec near_lo(double cluster) {
        return {Kind::tanh_near_lo, cluster, 0.0};
    }
    static StretchSpec two_sided(double cluster) {
        return {Kind::tanh_two_sided, cluster, 0.0};
    }
    static StretchSpec half_mass(double inner_width) {
        return {Kind::tanh_half_mass, 1.0, inner_width};
    }
};

namespace detail {

/// Monotone map [0,1] -> [0,1] realizing a StretchSpec; s=0,1 map exactly.
inline double stretch_map(double s, const StretchSpec& sp) {
    switch (sp.kind) {
        case StretchSpec::Kind::uniform:
            return s;
        case StretchSpec::Kind::tanh_near_lo: {
            if (sp.cluster <= 1.0) return s;
            // spacing ratio last/first ~ cluster for a = asinh-type profile
            const double a = std::log(sp.cluster);
            return (std::exp(a * s) - 1.0) / (std::exp(a) - 1.0);
        }
        case StretchSpec::Kind::tanh_two_sided: {
            if (sp.cluster <= 1.0) return s;
            const double a = 2.0 * std::atanh(1.0 - 2.0 / (1.0 + sp.cluster));
            return 0.5 * (1.0 + std::tanh(a * (s - 0.5)) / std::tanh(a * 0.5));
        }
        case StretchSpec::Kind::tanh_half_mass:
            // handled in build_axis (needs the axis length)
            return s;
    }
    return s;
}

inline std::vector<double> build_axis(double lo, double hi, std::size_t n,
                                      const StretchSpec& sp) {
    if (n < 3) throw std::invalid_argument("grid axis needs at least 3 nodes");
    if (!(hi > lo)) throw std::invalid_argument("grid axis needs hi > lo");
    std::vector<double> x(n);
    if (sp.kind == StretchSpec::Kind::tanh_half_mass) {
        // Two smooth pieces sharing the node budget: half inside
        // [lo, lo+w], half outside, blended by one tanh profile so the
        // spacing stays C1 across the seam.
        const double w = std::min(sp.inner_width, 0.5 * (hi - lo));
        const double L = hi - lo;
        // map: y(s) = L * (sinh(b s) / sinh(b)); choose b so y(1/2) = w
        // solve sinh(b/2)/sinh(b) = w/L  <=>  1/(2 cosh(b/2)) = w/L
        const double ratio = w / L;
        double b = 1.0;
        if (ratio < 0.5) {
            const double c = 1.0 / (2.0 * ratio); // cosh(b/2) = c >= 1
            b = 2.0 * std::acosh(c);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double s = double(i) / double(n - 1);
            x[i] = (b > 1e-8) ? lo + L * std::sinh(b * s) / std::sinh(b)
                              : lo + L * s;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = double(i) / double(n - 1);
            x[i] = lo + (hi - lo) * stretch_map(s, sp);
        }
    }
    x.front() = lo;
    x.back() = hi;
    for (std::size_t i = 1; i < n; ++i)
        if (!(x[i] > x[i - 1]))
            throw std::runtime_error("grid axis stretch map is not monotone");
    return x;
}

} // namespace detail

/// Tensor grid over [0, theta0] x [R0, R_max]; r_nodes are the scaled image
/// of R_nodes. Immutable after construction.
class SectorGrid {
  public:
    SectorGrid(const ParameterSet& prm, std::size_t n_omega, std::size_t n_R,
               const StretchSpec& omega_stretch = StretchSpec::uniform(),
               const StretchSpec& R_stretch = StretchSpec::uniform())
        : prm_(prm),
          omega_(detail::build_axis(0.0, prm.theta0, n_omega, omega_stretch)),
          R_(detail::build_axis(prm.R0, prm.R_max, n_R, R_stretch)) {
        r_.resize(R_.size());
        for (std::size_t j = 0; j < R_.size(); ++j) r_[j] = r_of_R(R_[j], prm);
    }

    const ParameterSet& params() const { return prm_; }
    const std::vector<double>& omega_nodes() const { return omega_; }
    const std::vector<double>& R_nodes() const { return R_; }
    const std::vector<double>& r_nodes() const { return r_; }
    std::size_t n_omega() const { return omega_.size(); }
    std::size_t n_R() const { return R_.size(); }
    double omega(std::size_t i) const { return omega_[i]; }
    double R(std::size_t j) const { return R_[j]; }
    double r(std::size_t j) const { return r_[j]; }

  private:
    ParameterSet prm_;
    std::vector<double> omega_, R_, r_;
};

using GridPtr = std::shared_ptr<const SectorGrid>;

inline GridPtr build_grid(const ParameterSet& prm, std::size_t n_omega,
                          std::size_t n_R,
                          const StretchSpec& omega_stretch = StretchSpec::uniform(),
                          const StretchSpec& R_stretch = StretchSpec::uniform()) {
    prm.validate();
    return std::make_shared<SectorGrid>(prm, n_omega, n_R, omega_stretch,
                                        R_stretch);
}

} // namespace sbl
