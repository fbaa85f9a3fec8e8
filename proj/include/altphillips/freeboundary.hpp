#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "altphillips/field.hpp"
#include "altphillips/operators.hpp"
#include "altphillips/params.hpp"

namespace ap {

struct InsufficientResolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FbClass { Regular, SingularCandidate, Unclassified };

inline const char* fb_class_name(FbClass c) {
    switch (c) {
        case FbClass::Regular: return "regular";
        case FbClass::SingularCandidate: return "singular_candidate";
        case FbClass::Unclassified: return "unclassified";
    }
    return "?";
}

struct FreeBoundaryPoint {
    int idx = -1;
    std::array<double, 2> x{};
    std::optional<std::array<double, 2>> normal;  // unit; empty when the fit degenerates
    FbClass cls = FbClass::Unclassified;
    double density_smallest_r = std::numeric_limits<double>::quiet_NaN();
};

/// Contact set {u <= tau} and the grid free boundary: contact points with a
/// neighbor above the threshold. The boundary list is ordered by flat index
/// (lexicographic), deterministically.
struct FreeBoundarySet {
    double tau = 0.0;
    std::vector<std::uint8_t> contact;  // mask over grid indices
    std::vector<FreeBoundaryPoint> boundary;

    bool in_contact(int idx) const { return contact[static_cast<std::size_t>(idx)] != 0; }
    std::vector<int> contact_indices() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < contact.size(); ++i)
            if (contact[i]) out.push_back(static_cast<int>(i));
        return out;
    }
};

struct FreeBoundaryOptions {
    /// tau = kappa_tau * c_gamma * h^beta; both the growth bound and
    /// non-degeneracy give u ~ c_gamma dist^beta, so this localizes the
    /// boundary to O(h). The 0.5 default centers tau between the profile
    /// values at distance 0 and h.
    double kappa_tau = 0.5;
    double delta_reg = 0.1;   // regular iff smallest-radius density >= delta_reg
    int normal_window = 6;    // least-squares window, in cells
};

inline double contact_threshold(const Grid& grid, const Params& params, const OperatorSpec& op,
                                double kappa_tau) {
    const double c = halfspace_coefficient(op, params.gamma, {1.0, 0.0});
    return kappa_tau * c * std::pow(grid.max_spacing(), params.beta);
}

inline FreeBoundarySet extract(const ScalarField& u, const Params& params, const OperatorSpec& op,
                               const FreeBoundaryOptions& opts = {}) {
    const Grid& g = u.grid;
    FreeBoundarySet fb;
    fb.tau = contact_threshold(g, params, op, opts.kappa_tau);
    fb.contact.assign(static_cast<std::size_t>(g.count()), 0);
    for (int idx = 0; idx < g.count(); ++idx)
        if (u[idx] <= fb.tau) fb.contact[static_cast<std::size_t>(idx)] = 1;
    for (int idx = 0; idx < g.count(); ++idx) {
        if (!fb.contact[static_cast<std::size_t>(idx)]) continue;
        const int ix = g.ix_of(idx), iy = g.iy_of(idx);
        bool adjacent_positive = false;
        const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        const int ndirs = g.dim == 1 ? 2 : 4;
        for (int d = 0; d < ndirs && !adjacent_positive; ++d) {
            const int jx = ix + dx[d], jy = iy + dy[d];
            if (jx < 0 || jx >= g.n[0] || jy < 0 || jy >= g.n[1]) continue;
            if (!fb.contact[static_cast<std::size_t>(g.index(jx, jy))]) adjacent_positive = true;
        }
        if (adjacent_positive) fb.boundary.push_back({idx, g.coord(idx), std::nullopt,
                                                      FbClass::Unclassified,
                                                      std::numeric_limits<double>::quiet_NaN()});
    }
    return fb;
}

/// Contact-set density over dyadic radii R0, R0/2, ... >= 8h with
/// R0 = quarter of the domain inradius. Densities count grid cells inside
/// the (domain-clipped) ball. A fixed grid cannot evaluate the limsup, so
/// the whole profile is reported and classification uses the smallest
/// radius.
struct DensityProfile {
    std::vector<double> radii;      // strictly decreasing
    std::vector<double> densities;  // in [0,1]
    bool regular = false;
};

inline DensityProfile density_profile(const ScalarField& u, const FreeBoundarySet& fb,
                                      int x0_idx, double delta_reg = 0.1) {
    const Grid& g = u.grid;
    bool listed = false;
    for (const auto& p : fb.boundary)
        if (p.idx == x0_idx) { listed = true; break; }
    if (!listed)
        throw std::invalid_argument("density_profile requires x0 from the boundary point list");
    const std::array<double, 2> x0 = g.coord(x0_idx);
    const double floor_r = 8.0 * g.max_spacing();
    DensityProfile prof;
    for (double r = 0.25 * g.inradius(); r >= floor_r * (1.0 - 1e-12); r *= 0.5) {
        const auto ball = restrict_to_ball(g, x0, r);
        if (ball.empty()) continue;
        long hits = 0;
        for (int idx : ball) hits += fb.in_contact(idx) ? 1 : 0;
        prof.radii.push_back(r);
        prof.densities.push_back(static_cast<double>(hits) / static_cast<double>(ball.size()));
    }
    if (prof.radii.size() < 2)
        throw InsufficientResolution(
            "density_profile needs at least 2 dyadic radii in [8h, inradius/4]");
    prof.regular = prof.densities.back() >= delta_reg;
    return prof;
}

/// Free-boundary normal from the distorted field u^{1/beta}, which grows
/// linearly from the boundary (the gradient of u itself vanishes there).
/// Least-squares affine fit over a window of k cells; degenerate fits
/// return no normal instead of failing.
inline std::optional<std::array<double, 2>> normal_estimate(const ScalarField& u,
                                                            const Params& params, double tau,
                                                            int x0_idx, int window_cells = 6) {
    const Grid& g = u.grid;
    const std::array<double, 2> x0 = g.coord(x0_idx);
    const auto ball = restrict_to_ball(g, x0, window_cells * g.max_spacing());
    int positive = 0;
    for (int idx : ball)
        if (u[idx] > tau) ++positive;
    if (positive < 5) return std::nullopt;

    // Normal equations for v ~ a + b.(x - x0); unknowns (a, b_1[, b_2]).
    const int m = g.dim + 1;
    double ata[3][3] = {{0}}, atv[3] = {0};
    for (int idx : ball) {
        const auto x = g.coord(idx);
        const double row[3] = {1.0, x[0] - x0[0], g.dim == 2 ? x[1] - x0[1] : 0.0};
        const double v = u[idx] > tau ? std::pow(u[idx], 1.0 / params.beta) : 0.0;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) ata[i][j] += row[i] * row[j];
            atv[i] += row[i] * v;
        }
    }
    // Gaussian elimination with partial pivoting on the tiny system.
    double scale = 0.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(ata[i][i]));
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
        if (std::abs(ata[piv][col]) <= 1e-12 * scale) return std::nullopt;  // rank-deficient
        if (piv != col) {
            for (int j = 0; j < m; ++j) std::swap(ata[piv][j], ata[col][j]);
            std::swap(atv[piv], atv[col]);
        }
        for (int r = col + 1; r < m; ++r) {
            const double w = ata[r][col] / ata[col][col];
            for (int j = col; j < m; ++j) ata[r][j] -= w * ata[col][j];
            atv[r] -= w * atv[col];
        }
    }
    double sol[3] = {0, 0, 0};
    for (int r = m - 1; r >= 0; --r) {
        double s = atv[r];
        for (int j = r + 1; j < m; ++j) s -= ata[r][j] * sol[j];
        sol[r] = s / ata[r][r];
    }
    const double bx = sol[1], by = g.dim == 2 ? sol[2] : 0.0;
    const double norm = std::hypot(bx, by);
    if (!(norm > 1e-14 * (1.0 + std::abs(sol[0])))) return std::nullopt;
    return std::array<double, 2>{bx / norm, by / norm};
}

inline double angle_between(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double d = std::clamp(a[0] * b[0] + a[1] * b[1], -1.0, 1.0);
    return std::acos(d);
}

/// Max pairwise angle between estimated normals of boundary points within
/// distance rho of each other. Zero when fewer than two normals exist.
inline double normal_oscillation(const FreeBoundarySet& fb, double rho) {
    double worst = 0.0;
    for (std::size_t i = 0; i < fb.boundary.size(); ++i) {
        if (!fb.boundary[i].normal) continue;
        for (std::size_t j = i + 1; j < fb.boundary.size(); ++j) {
            if (!fb.boundary[j].normal) continue;
            const auto& xi = fb.boundary[i].x;
            const auto& xj = fb.boundary[j].x;
            if (std::hypot(xi[0] - xj[0], xi[1] - xj[1]) > rho) continue;
            worst = std::max(worst, angle_between(*fb.boundary[i].normal, *fb.boundary[j].normal));
        }
    }
    return worst;
}

/// extract() plus per-point classification and normal estimation. Normals
/// are only attached where the least-squares window fits inside the domain;
/// clipped windows bias the fit and are reported as unavailable.
inline FreeBoundarySet extract_and_analyze(const ScalarField& u, const Params& params,
                                           const OperatorSpec& op,
                                           const FreeBoundaryOptions& opts = {}) {
    FreeBoundarySet fb = extract(u, params, op, opts);
    const double window_margin = (opts.normal_window + 1) * u.grid.max_spacing();
    for (auto& p : fb.boundary) {
        try {
            const DensityProfile prof = density_profile(u, fb, p.idx, opts.delta_reg);
            p.density_smallest_r = prof.densities.back();
            p.cls = prof.regular ? FbClass::Regular : FbClass::SingularCandidate;
        } catch (const InsufficientResolution&) {
            p.cls = FbClass::Unclassified;
        }
        if (u.grid.distance_to_boundary(p.x) >= window_margin)
            p.normal = normal_estimate(u, params, fb.tau, p.idx, opts.normal_window);
    }
    return fb;
}

}  // namespace ap
