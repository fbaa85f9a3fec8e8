#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ap {

/// Uniform axis-aligned lattice in d in {1,2}. Point (ix,iy) sits at
/// lo + (ix*hx, iy*hy); indices are flattened x-fastest. Immutable.
struct Grid {
    int dim = 1;
    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
    std::array<int, 2> n{};    // points per axis, >= 3
    std::array<double, 2> h{}; // derived, (hi-lo)/(n-1)

    Grid(int dim_, std::array<double, 2> lo_, std::array<double, 2> hi_, std::array<int, 2> n_)
        : dim(dim_), lo(lo_), hi(hi_), n(n_) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
        if (dim == 1) { n[1] = 1; lo[1] = 0.0; hi[1] = 0.0; }
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 3)
                throw std::invalid_argument("grid needs at least 3 points per axis, got " +
                                            std::to_string(n[a]));
            if (!(hi[a] > lo[a]))
                throw std::invalid_argument("grid corner ordering requires lo < hi");
            h[a] = (hi[a] - lo[a]) / static_cast<double>(n[a] - 1);
        }
        if (dim == 1) h[1] = 0.0;
    }

    static Grid line(double a, double b, int points) {
        return Grid(1, {a, 0.0}, {b, 0.0}, {points, 1});
    }
    static Grid box(std::array<double, 2> a, std::array<double, 2> b, std::array<int, 2> points) {
        return Grid(2, a, b, points);
    }
    static Grid square(double a, double b, int points) {
        return Grid(2, {a, a}, {b, b}, {points, points});
    }

    int count() const { return n[0] * n[1]; }
    int index(int ix, int iy = 0) const { return ix + n[0] * iy; }
    int ix_of(int idx) const { return idx % n[0]; }
    int iy_of(int idx) const { return idx / n[0]; }

    std::array<double, 2> coord(int idx) const {
        return {lo[0] + h[0] * ix_of(idx), dim == 2 ? lo[1] + h[1] * iy_of(idx) : 0.0};
    }

    bool is_boundary(int idx) const {
        const int ix = ix_of(idx);
        if (ix == 0 || ix == n[0] - 1) return true;
        if (dim == 2) {
            const int iy = iy_of(idx);
            if (iy == 0 || iy == n[1] - 1) return true;
        }
        return false;
    }
    bool is_interior(int idx) const { return !is_boundary(idx); }

    /// True when the full 3^dim centered stencil around idx stays on the grid.
    bool has_full_stencil(int idx) const {
        const int ix = ix_of(idx);
        if (ix < 1 || ix > n[0] - 2) return false;
        if (dim == 2) {
            const int iy = iy_of(idx);
            if (iy < 1 || iy > n[1] - 2) return false;
        }
        return true;
    }

    std::vector<int> interior_indices() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(count()));
        for (int idx = 0; idx < count(); ++idx)
            if (is_interior(idx)) out.push_back(idx);
        return out;
    }

    double min_spacing() const { return dim == 2 ? std::min(h[0], h[1]) : h[0]; }
    double max_spacing() const { return dim == 2 ? std::max(h[0], h[1]) : h[0]; }

    /// Half the smallest side length: radius of the largest inscribed ball.
    double inradius() const {
        double r = 0.5 * (hi[0] - lo[0]);
        if (dim == 2) r = std::min(r, 0.5 * (hi[1] - lo[1]));
        return r;
    }

    double distance_to_boundary(const std::array<double, 2>& x) const {
        double d = std::min(x[0] - lo[0], hi[0] - x[0]);
        if (dim == 2) d = std::min({d, x[1] - lo[1], hi[1] - x[1]});
        return d;
    }

    bool contains(const std::array<double, 2>& x) const {
        if (x[0] < lo[0] || x[0] > hi[0]) return false;
        if (dim == 2 && (x[1] < lo[1] || x[1] > hi[1])) return false;
        return true;
    }
};

/// Grid indices whose coordinates lie in the closed Euclidean ball B_r(center).
/// Cell membership only, no partial-cell weighting; an empty result is valid.
/// A relative epsilon absorbs roundoff when r is an exact multiple of h.
inline std::vector<int> restrict_to_ball(const Grid& g, const std::array<double, 2>& center,
                                         double r) {
    if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    const double r2 = r * r * (1.0 + 1e-12);
    std::vector<int> out;
    // Bounding index window first; exact distance test inside.
    const int ix0 = std::max(0, static_cast<int>(std::ceil((center[0] - r - g.lo[0]) / g.h[0] - 1e-9)));
    const int ix1 = std::min(g.n[0] - 1,
                             static_cast<int>(std::floor((center[0] + r - g.lo[0]) / g.h[0] + 1e-9)));
    if (g.dim == 1) {
        for (int ix = ix0; ix <= ix1; ++ix) {
            const double dx = g.lo[0] + g.h[0] * ix - center[0];
            if (dx * dx <= r2) out.push_back(g.index(ix));
        }
        return out;
    }
    const int iy0 = std::max(0, static_cast<int>(std::ceil((center[1] - r - g.lo[1]) / g.h[1] - 1e-9)));
    const int iy1 = std::min(g.n[1] - 1,
                             static_cast<int>(std::floor((center[1] + r - g.lo[1]) / g.h[1] + 1e-9)));
    for (int iy = iy0; iy <= iy1; ++iy) {
        const double dy = g.lo[1] + g.h[1] * iy - center[1];
        for (int ix = ix0; ix <= ix1; ++ix) {
            const double dx = g.lo[0] + g.h[0] * ix - center[0];
            if (dx * dx + dy * dy <= r2) out.push_back(g.index(ix, iy));
        }
    }
    return out;
}

}  // namespace ap
