#pragma once

/// @file field.hpp
/// @brief Scalar field on a SectorGrid, stored omega-major. The universal
///        carrier for velocities, pressures, forcings and residuals.

#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbl/grid.hpp"

namespace sbl {

class Field {
  public:
    Field() = default;
    explicit Field(GridPtr grid, double fill = 0.0, std::string label = {})
        : grid_(std::move(grid)),
          label_(std::move(label)),
          v_(grid_->n_omega() * grid_->n_R(), fill) {}

    /// Sample a callable f(omega, R) on every node.
    static Field sample(GridPtr grid,
                        const std::function<double(double, double)>& f,
                        std::string label = {}) {
        Field out(grid, 0.0, std::move(label));
        for (std::size_t i = 0; i < grid->n_omega(); ++i)
            for (std::size_t j = 0; j < grid->n_R(); ++j)
                out(i, j) = f(grid->omega(i), grid->R(j));
        return out;
    }

    /// Sample a radial profile g(R) (constant in omega).
    static Field sample_radial(GridPtr grid,
                               const std::function<double(double)>& g,
                               std::string label = {}) {
        Field out(grid, 0.0, std::move(label));
        for (std::size_t j = 0; j < grid->n_R(); ++j) {
            const double val = g(grid->R(j));
            for (std::size_t i = 0; i < grid->n_omega(); ++i) out(i, j) = val;
        }
        return out;
    }

    const GridPtr& grid() const { return grid_; }
    const std::string& label() const { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }
    std::size_t n_omega() const { return grid_->n_omega(); }
    std::size_t n_R() const { return grid_->n_R(); }
    bool empty() const { return v_.empty(); }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < n_omega() && j < n_R());
        return v_[i * n_R() + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < n_omega() && j < n_R());
        return v_[i * n_R() + j];
    }
    const std::vector<double>& data() const { return v_; }
    std::vector<double>& data() { return v_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    // Pointwise algebra; grids must be the very same object.
    Field& operator+=(const Field& o) { return zip(o, [](double a, double b) { return a + b; }); }
    Field& operator-=(const Field& o) { return zip(o, [](double a, double b) { return a - b; }); }
    Field& operator*=(double c) {
        for (double& x : v_) x *= c;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double c, Field a) { return a *= c; }

    /// Pointwise product.
    friend Field hadamard(Field a, const Field& b) {
        return a.zip(b, [](double x, double y) { return x * y; });
    }

    /// Apply f to every value in place.
    Field& transform(const std::function<double(double)>& f) {
        for (double& x : v_) x = f(x);
        return *this;
    }

  private:
    Field& zip(const Field& o, double (*op)(double, double)) {
        if (grid_.get() != o.grid_.get())
            throw std::invalid_argument("Field algebra requires a shared grid");
        for (std::size_t k = 0; k < v_.size(); ++k) v_[k] = op(v_[k], o.v_[k]);
        return *this;
    }

    GridPtr grid_;
    std::string label_;
    std::vector<double> v_;
};

} // namespace sbl
