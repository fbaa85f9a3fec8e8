#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "altphillips/field.hpp"
#include "altphillips/freeboundary.hpp"
#include "altphillips/hessian.hpp"
#include "altphillips/operators.hpp"
#include "altphillips/params.hpp"

namespace ap {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kRescaleRefPoints = 129;
inline constexpr double kRescaleRefHalfWidth = 1.1;
inline constexpr int kDirectionLattice = 720;  // 0.5 degree resolution

/// u(r x + x0) / r^beta resampled onto a fixed reference grid over the
/// B_1-enclosing box [-1.1, 1.1]^d by bilinear interpolation. Decouples
/// blow-up comparisons from the source resolution; interpolation error is
/// O(h_src^2 / r^2) relative to the target scale.
struct Rescaling {
    std::array<double, 2> center{};
    double r = 1.0;
    double beta = 2.0;
    ScalarField target;
};

inline Rescaling rescale(const ScalarField& u, const std::array<double, 2>& center, double r,
                         const Params& params) {
    const Grid& src = u.grid;
    if (!(r >= 4.0 * src.max_spacing()))
        throw std::invalid_argument("rescale requires r >= 4h for interpolation validity");
    if (src.distance_to_boundary(center) < r * (1.0 - 1e-12))
        throw GeometryError("rescale: ball B_r(x0) escapes the domain");
    const double w = kRescaleRefHalfWidth;
    const Grid ref = src.dim == 1 ? Grid::line(-w, w, kRescaleRefPoints)
                                  : Grid::square(-w, w, kRescaleRefPoints);
    const double rb = std::pow(r, params.beta);
    ScalarField target(ref);
    for (int idx = 0; idx < ref.count(); ++idx) {
        const auto xi = ref.coord(idx);
        const std::array<double, 2> x{center[0] + r * xi[0],
                                      src.dim == 2 ? center[1] + r * xi[1] : 0.0};
        target[idx] = u.interpolate(x) / rb;
    }
    return {center, r, params.beta, std::move(target)};
}

struct GrowthFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    std::vector<double> radii;  // radii actually used, decreasing
    std::vector<double> sups;
};

/// Least-squares slope of log sup_{B_r(x0)} u against log r over dyadic
/// radii. Radii run from min(inradius/2, dist(x0, boundary)) down to 8h;
/// radii with vanishing sup are excluded, and fewer than 4 usable radii is
/// an error.
inline GrowthFit fit_growth_exponent(const ScalarField& u, int x0_idx) {
    const Grid& g = u.grid;
    const std::array<double, 2> x0 = g.coord(x0_idx);
    const double cap = std::min(0.5 * g.inradius(), g.distance_to_boundary(x0));
    const double floor_r = 8.0 * g.max_spacing();
    GrowthFit fit;
    for (double r = cap; r >= floor_r * (1.0 - 1e-12); r *= 0.5) {
        const auto ball = restrict_to_ball(g, x0, r);
        double sup = 0.0;
        for (int idx : ball) sup = std::max(sup, u[idx]);
        if (sup > 0.0) {
            fit.radii.push_back(r);
            fit.sups.push_back(sup);
        }
    }
    const int m = static_cast<int>(fit.radii.size());
    if (m < 4)
        throw InsufficientResolution("fit_growth_exponent needs >= 4 dyadic radii with sup > 0");
    double sx = 0, sy = 0;
    for (int i = 0; i < m; ++i) {
        sx += std::log(fit.radii[static_cast<std::size_t>(i)]);
        sy += std::log(fit.sups[static_cast<std::size_t>(i)]);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        const double dx = std::log(fit.radii[static_cast<std::size_t>(i)]) - mx;
        const double dy = std::log(fit.sups[static_cast<std::size_t>(i)]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    fit.slope = sxy / sxx;
    double ss = 0;
    for (int i = 0; i < m; ++i) {
        const double dx = std::log(fit.radii[static_cast<std::size_t>(i)]) - mx;
        const double dy = std::log(fit.sups[static_cast<std::size_t>(i)]) - my;
        const double resid = dy - fit.slope * dx;
        ss += resid * resid;
    }
    fit.stderr_ = m > 2 ? std::sqrt(ss / (m - 2) / sxx) : 0.0;
    return fit;
}

/// sup_{B_{R/2}} u / (inf_{B_{R/2}} u + R^beta). Finite and uniform over
/// centers and radii for solutions; scaling-invariant for the half-space
/// profile about its boundary points.
inline double harnack_constant(const ScalarField& u, const std::array<double, 2>& center,
                               double R, const Params& params) {
    const Grid& g = u.grid;
    if (g.distance_to_boundary(center) < R * (1.0 - 1e-12))
        throw GeometryError("harnack_constant: ball B_R(center) escapes the domain");
    const auto ball = restrict_to_ball(g, center, 0.5 * R);
    if (ball.empty()) throw InsufficientResolution("harnack_constant: empty ball sample");
    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    for (int idx : ball) {
        sup = std::max(sup, u[idx]);
        inf = std::min(inf, u[idx]);
    }
    return sup / (inf + std::pow(R, params.beta));
}

struct HessianRatio {
    double value = 0.0;
    int points = 0;  // 0 marks an empty positivity sample
};

/// sup over interior points of {u > tau} (full stencils only) of
/// |D^2 u| / u^{gamma-1}, the scaling-invariant Hessian bound. The bound is
/// an interior-ball estimate, so the sup is taken a fixed physical margin
/// (quarter of the inradius, the same anchor as the density radii) away
/// from the Dirichlet boundary: where the positivity set touches the fixed
/// boundary the ratio reflects the boundary data, not the free-boundary
/// quantity, and a grid-proportional margin would drift with resolution.
inline HessianRatio hessian_ratio_sup(const ScalarField& u, const Params& params, double tau) {
    const Grid& g = u.grid;
    const double margin = 0.25 * g.inradius();
    HessianRatio out;
    for (int idx = 0; idx < g.count(); ++idx) {
        if (!g.has_full_stencil(idx) || !(u[idx] > tau)) continue;
        if (g.distance_to_boundary(g.coord(idx)) < margin) continue;
        const double ratio =
            hessian_central(u, idx).spectral_norm() / std::pow(u[idx], params.gamma - 1.0);
        out.value = std::max(out.value, ratio);
        ++out.points;
    }
    return out;
}

inline std::vector<std::array<double, 2>> direction_lattice(int dim) {
    if (dim == 1) return {{1.0, 0.0}, {-1.0, 0.0}};
    std::vector<std::array<double, 2>> dirs;
    dirs.reserve(kDirectionLattice);
    for (int k = 0; k < kDirectionLattice; ++k) {
        const double th = 2.0 * M_PI * k / kDirectionLattice;
        dirs.push_back({std::cos(th), std::sin(th)});
    }
    return dirs;
}

struct ProfileFit {
    double distance = 0.0;
    std::array<double, 2> e{1.0, 0.0};
};

/// L-infinity distance on the reference unit ball between the rescaled field
/// and the half-space profile c_e (x.e)_+^beta, minimized over the angular
/// direction lattice.
inline ProfileFit profile_distance(const Rescaling& resc, const OperatorSpec& spec,
                                   const Params& params) {
    const Grid& ref = resc.target.grid;
    std::vector<int> pts;
    std::vector<double> proj_x, proj_y;
    for (int idx = 0; idx < ref.count(); ++idx) {
        const auto xi = ref.coord(idx);
        if (xi[0] * xi[0] + xi[1] * xi[1] <= 1.0 + 1e-12) {
            pts.push_back(idx);
            proj_x.push_back(xi[0]);
            proj_y.push_back(xi[1]);
        }
    }
    ProfileFit best;
    best.distance = std::numeric_limits<double>::infinity();
    for (const auto& e : direction_lattice(ref.dim)) {
        const double c = halfspace_coefficient(spec, params.gamma, e);
        double dist = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double t = proj_x[i] * e[0] + (ref.dim == 2 ? proj_y[i] * e[1] : 0.0);
            const double prof = t > 0.0 ? c * std::pow(t, params.beta) : 0.0;
            dist = std::max(dist, std::abs(resc.target[pts[i]] - prof));
            if (dist >= best.distance) break;  // cannot beat the incumbent
        }
        if (dist < best.distance) {
            best.distance = dist;
            best.e = e;
        }
    }
    return best;
}

/// Smallest eigenvalue of the discrete Hessian of the rescaled target over
/// reference points inside the unit ball. Approaches >= -o(1) along blow-up
/// sequences at regular points.
inline double convexity_margin(const Rescaling& resc) {
    const Grid& ref = resc.target.grid;
    double margin = std::numeric_limits<double>::infinity();
    for (int idx = 0; idx < ref.count(); ++idx) {
        if (!ref.has_full_stencil(idx)) continue;
        const auto xi = ref.coord(idx);
        if (xi[0] * xi[0] + xi[1] * xi[1] > 1.0 + 1e-12) continue;
        margin = std::min(margin, hessian_central(resc.target, idx).min_eigenvalue());
    }
    return std::isfinite(margin) ? margin : 0.0;
}

/// Worst over directions e with e.e* >= delta of the minimum over B_{1/2}
/// of the centered directional difference of the target. Nonnegative (up to
/// tolerance) when the target is monotone in the cone around e*.
inline double monotonicity_cone(const Rescaling& resc, const std::array<double, 2>& e_star,
                                double delta) {
    const Grid& ref = resc.target.grid;
    const double step = ref.max_spacing();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& e : direction_lattice(ref.dim)) {
        if (e[0] * e_star[0] + e[1] * e_star[1] < delta) continue;
        double lo = std::numeric_limits<double>::infinity();
        for (int idx = 0; idx < ref.count(); ++idx) {
            const auto xi = ref.coord(idx);
            if (xi[0] * xi[0] + xi[1] * xi[1] > 0.25 + 1e-12) continue;
            const std::array<double, 2> fwd{xi[0] + step * e[0], xi[1] + step * e[1]};
            const std::array<double, 2> bwd{xi[0] - step * e[0], xi[1] - step * e[1]};
            lo = std::min(lo, (resc.target.interpolate(fwd) - resc.target.interpolate(bwd)) /
                                  (2.0 * step));
        }
        worst = std::min(worst, lo);
    }
    return std::isfinite(worst) ? worst : 0.0;
}

}  // namespace ap
