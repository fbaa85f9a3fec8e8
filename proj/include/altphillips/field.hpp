#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "altphillips/grid.hpp"

namespace ap {

/// Real values on a Grid, one per lattice point.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.count()), fill) {}

    ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != g.count())
            throw std::invalid_argument("field value count does not match grid point count");
    }

    template <typename F>
    static ScalarField sample(const Grid& g, F&& f) {
        ScalarField out(g);
        for (int idx = 0; idx < g.count(); ++idx) out.values[static_cast<std::size_t>(idx)] = f(g.coord(idx));
        return out;
    }

    double& operator[](int idx) { return values[static_cast<std::size_t>(idx)]; }
    double operator[](int idx) const { return values[static_cast<std::size_t>(idx)]; }

    double max() const { return *std::max_element(values.begin(), values.end()); }
    double min() const { return *std::min_element(values.begin(), values.end()); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Bilinear interpolation at x. Coordinates are clamped to the grid box,
    /// which extends the field by its nearest value.
    double interpolate(const std::array<double, 2>& x) const {
        const auto cell = [](double coord, double lo, double h, int n) {
            double t = (coord - lo) / h;
            t = std::clamp(t, 0.0, static_cast<double>(n - 1));
            int i = std::min(static_cast<int>(t), n - 2);
            return std::pair<int, double>{i, t - i};
        };
        const auto [ix, fx] = cell(x[0], grid.lo[0], grid.h[0], grid.n[0]);
        if (grid.dim == 1) {
            return (1.0 - fx) * (*this)[grid.index(ix)] + fx * (*this)[grid.index(ix + 1)];
        }
        const auto [iy, fy] = cell(x[1], grid.lo[1], grid.h[1], grid.n[1]);
        const double v00 = (*this)[grid.index(ix, iy)];
        const double v10 = (*this)[grid.index(ix + 1, iy)];
        const double v01 = (*this)[grid.index(ix, iy + 1)];
        const double v11 = (*this)[grid.index(ix + 1, iy + 1)];
        return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
    }
};

}  // namespace ap
