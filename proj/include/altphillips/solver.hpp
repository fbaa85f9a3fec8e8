#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "altphillips/discretization.hpp"
#include "altphillips/linear_solve.hpp"
#include "altphillips/operators.hpp"
#include "altphillips/params.hpp"

namespace ap {

/// Dirichlet data catalog. Every entry is nonnegative on the boundary by
/// construction (polynomials are clamped at 0).
struct BoundaryData {
    enum class Type { Constant, Halfspace, Polynomial, Bump };

    Type type = Type::Constant;
    double value = 0.0;                  // Constant
    std::array<double, 2> e{1.0, 0.0};   // Halfspace direction (unit)
    double scale = 1.0;                  // Halfspace / Bump multiplier
    std::vector<double> coeffs;          // Polynomial: 1D {c0,cx,cxx}; 2D {c0,cx,cy,cxx,cxy,cyy}

    static BoundaryData constant(double v) {
        if (v < 0.0) throw std::invalid_argument("constant boundary data must be >= 0");
        BoundaryData b;
        b.type = Type::Constant;
        b.value = v;
        return b;
    }
    static BoundaryData halfspace(std::array<double, 2> dir, double s = 1.0) {
        if (s < 0.0) throw std::invalid_argument("halfspace boundary scale must be >= 0");
        const double norm = std::hypot(dir[0], dir[1]);
        if (!(norm > 0.0)) throw std::invalid_argument("halfspace direction must be nonzero");
        BoundaryData b;
        b.type = Type::Halfspace;
        b.e = {dir[0] / norm, dir[1] / norm};
        b.scale = s;
        return b;
    }
    static BoundaryData polynomial(std::vector<double> c) {
        BoundaryData b;
        b.type = Type::Polynomial;
        b.coeffs = std::move(c);
        return b;
    }
    static BoundaryData bump(double s) {
        if (s < 0.0) throw std::invalid_argument("bump boundary scale must be >= 0");
        BoundaryData b;
        b.type = Type::Bump;
        b.scale = s;
        return b;
    }

    double operator()(const std::array<double, 2>& x, const Grid& grid, const OperatorSpec& op,
                      const Params& params) const {
        switch (type) {
            case Type::Constant:
                return value;
            case Type::Halfspace: {
                const double c = halfspace_coefficient(op, params.gamma, e);
                const double t = x[0] * e[0] + (grid.dim == 2 ? x[1] * e[1] : 0.0);
                return t > 0.0 ? scale * c * std::pow(t, params.beta) : 0.0;
            }
            case Type::Polynomial: {
                auto c = [&](std::size_t i) { return i < coeffs.size() ? coeffs[i] : 0.0; };
                double p;
                if (grid.dim == 1)
                    p = c(0) + c(1) * x[0] + c(2) * x[0] * x[0];
                else
                    p = c(0) + c(1) * x[0] + c(2) * x[1] + c(3) * x[0] * x[0] +
                        c(4) * x[0] * x[1] + c(5) * x[1] * x[1];
                return std::max(p, 0.0);
            }
            case Type::Bump: {
                double p = scale;
                for (int a = 0; a < grid.dim; ++a) {
                    const double t = (x[a] - grid.lo[a]) / (grid.hi[a] - grid.lo[a]);
                    const double s = std::sin(0.5 * M_PI * t);
                    p *= s * s;
                }
                return p;
            }
        }
        return 0.0;
    }
};

struct SolverKnobs {
    double tol_residual = 1e-10;  // relative to 1 + max u^{gamma-1}
    int max_outer = 500;
    double relaxation = 0.8;      // omega in (0,1]
    double rhs_floor = 0.0;       // epsilon added under the power
};

struct ProblemSpec {
    Params params;
    OperatorSpec op;
    Grid grid;
    BoundaryData boundary;
    SolverKnobs knobs;
};

struct SolveResult {
    ScalarField u;
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
    /// Minimum interior value of the final unclamped inner solve.
    double min_unclamped = 0.0;
};

namespace detail {

struct HowardOutcome {
    ScalarField u;
    std::vector<int> policy;
    int sweeps = 0;
};

/// Howard policy iteration for max_p row_p(u) - W u = f with Dirichlet data:
/// freeze the argmax policy, solve the linear system, repeat until the
/// policy stabilizes. Terminates in at most policy_count * interior_count
/// sweeps by monotone improvement; exceeding the cap is a hard error.
inline HowardOutcome howard_solve(const DiscreteOperator& op, LinearSolver& lin,
                                  const std::vector<double>& weight, const ScalarField& f,
                                  const ScalarField& bdry, std::vector<int> policy) {
    const int interior = static_cast<int>(op.grid.interior_indices().size());
    const long cap = static_cast<long>(op.policy_count()) * interior + 1;
    HowardOutcome out{ScalarField(op.grid), std::move(policy), 0};
    for (long sweep = 0; sweep < cap; ++sweep) {
        out.u = lin.solve(out.policy, weight, f, bdry);
        std::vector<int> next = active_policy(op, out.u);
        ++out.sweeps;
        if (next == out.policy) return out;
        out.policy = std::move(next);
    }
    long churn = 0;
    const std::vector<int> final_policy = active_policy(op, out.u);
    for (std::size_t i = 0; i < final_policy.size(); ++i)
        if (final_policy[i] != out.policy[i]) ++churn;
    throw std::runtime_error("Howard iteration did not stabilize within " + std::to_string(cap) +
                             " sweeps (" + std::to_string(churn) + " points still switching)");
}

/// Root of s x + x^{gamma-1} = b on [0, b/s] (frozen-neighbor cell
/// equation). The left side is strictly increasing, so bisection is safe;
/// 60 halvings reach full double resolution deterministically.
inline double cell_equation_root(double s, double gm1, double b) {
    if (!(b > 0.0)) return 0.0;
    double lo = 0.0, hi = b / s;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (s * mid + std::pow(mid, gm1) > b) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline ScalarField boundary_field(const ProblemSpec& p) {
    ScalarField g(p.grid, 0.0);
    for (int idx = 0; idx < p.grid.count(); ++idx) {
        if (!p.grid.is_boundary(idx)) continue;
        const double v = p.boundary(p.grid.coord(idx), p.grid, p.op, p.params);
        if (!(v >= 0.0))
            throw std::invalid_argument("boundary data is negative at a boundary point: " +
                                        std::to_string(v));
        g[idx] = v;
    }
    return g;
}

/// Nonnegative solution of F(D^2 u) = u^{gamma-1} with Dirichlet data.
/// Outer loop: the reaction term is linearized semi-implicitly — each step
/// solves
///   max_p row_p(u_{k+1}) - W_k u_{k+1} = u_k^{gamma-1} - W_k u_k
/// by Howard policy iteration, then relaxes and clamps at 0. Any W >= 0
/// leaves the fixed point unchanged; W_k is evaluated at a pointwise
/// frozen-neighbor prediction of the landing value (the derivative of
/// u^{gamma-1} is unbounded at u = 0 for gamma < 2, so linearizing at the
/// current iterate, or not linearizing at all, is non-contractive near the
/// free boundary). A floor at the deep-contact scale c^{1/(gamma-1)} h^beta
/// keeps W finite where the prediction vanishes. Non-convergence is
/// reported through the flag and full residual history, never silently.
inline SolveResult solve(const ProblemSpec& p) {
    if (!(p.knobs.relaxation > 0.0 && p.knobs.relaxation <= 1.0))
        throw std::invalid_argument("relaxation must lie in (0, 1]");
    const DiscreteOperator opd = build(p.op, p.grid);
    LinearSolver lin(opd);
    const ScalarField g = boundary_field(p);
    const double gm1 = p.params.gamma - 1.0;
    const double c_gamma = halfspace_coefficient(p.op, p.params.gamma, {1.0, 0.0});
    // Guard for the linearization weight where the predicted value vanishes:
    // far below the deep-contact scale c^{1/(gamma-1)} h^beta, so it never
    // caps a cell whose residual could matter.
    const double w_guard = 1e-12 * std::pow(c_gamma, 1.0 / gm1) *
                           std::pow(p.grid.max_spacing(), p.params.beta);

    std::vector<int> policy(static_cast<std::size_t>(p.grid.count()), -1);
    for (int idx = 0; idx < p.grid.count(); ++idx)
        if (p.grid.is_interior(idx)) policy[static_cast<std::size_t>(idx)] = 0;

    // Supersolution-flavored start: solve apply(u)=0 with the given data.
    auto init = detail::howard_solve(opd, lin, {}, ScalarField(p.grid, 0.0), g, std::move(policy));
    policy = std::move(init.policy);
    ScalarField u = std::move(init.u);
    for (double& v : u.values) v = std::max(v, 0.0);

    SolveResult res{u, 0, {}, false, 0.0};
    ScalarField f(p.grid, 0.0);
    std::vector<double> weight(static_cast<std::size_t>(p.grid.count()), 0.0);
    const double omega = p.knobs.relaxation;

    for (int k = 0; k < p.knobs.max_outer; ++k) {
        policy = active_policy(opd, u);
        for (int idx = 0; idx < p.grid.count(); ++idx) {
            if (!p.grid.is_interior(idx)) continue;
            const auto& row =
                opd.weights[static_cast<std::size_t>(policy[static_cast<std::size_t>(idx)])];
            const int ix = p.grid.ix_of(idx), iy = p.grid.iy_of(idx);
            double nbr = 0.0, s = 0.0;
            for (std::size_t d = 0; d < opd.dirs.size(); ++d) {
                if (row[d] == 0.0) continue;
                const auto& v = opd.dirs[d].v;
                nbr += row[d] *
                       (std::max(u[p.grid.index(ix + v[0], iy + v[1])], 0.0) +
                        std::max(u[p.grid.index(ix - v[0], iy - v[1])], 0.0)) /
                       opd.dirs[d].len2;
                s += 2.0 * row[d] / opd.dirs[d].len2;
            }
            const double predicted = detail::cell_equation_root(s, gm1, nbr);
            const double w =
                gm1 * std::pow(predicted + p.knobs.rhs_floor + w_guard, p.params.gamma - 2.0);
            weight[static_cast<std::size_t>(idx)] = w;
            // Anchor the affine reaction model at the predicted landing
            // value: the per-cell step then solves the frozen-neighbor
            // equation exactly, and the predictor is consistent at any
            // discrete solution, so the fixed point is unchanged.
            f[idx] = std::pow(predicted + p.knobs.rhs_floor, gm1) - w * predicted;
        }
        auto inner = detail::howard_solve(opd, lin, weight, f, g, std::move(policy));
        policy = std::move(inner.policy);
        res.min_unclamped = 0.0;
        for (int idx = 0; idx < p.grid.count(); ++idx) {
            if (!p.grid.is_interior(idx)) continue;
            const double v = inner.u[idx];
            res.min_unclamped = std::min(res.min_unclamped, v);
            u[idx] = (1.0 - omega) * u[idx] + omega * std::max(v, 0.0);
        }
        res.iterations = k + 1;

        const ScalarField au = apply(opd, u);
        double resid = 0.0, rhs_max = 0.0;
        for (int idx = 0; idx < p.grid.count(); ++idx) {
            if (!p.grid.is_interior(idx)) continue;
            const double up = std::max(u[idx], 0.0);
            const double rhs = std::pow(up, gm1);
            resid = std::max(resid, std::abs(au[idx] - rhs));
            rhs_max = std::max(rhs_max, rhs);
        }
        res.residual_history.push_back(resid);
        if (resid <= p.knobs.tol_residual * (1.0 + rhs_max)) {
            res.converged = true;
            break;
        }
    }
    res.u = std::move(u);
    return res;
}

struct ComparisonOutcome {
    bool pass = false;
    double worst_gap = 0.0;  // max of u1 - u2; negative or ~0 when ordered
};

/// Maximum-principle regression: with g1 <= g2 on the boundary, the solved
/// fields must satisfy u1 <= u2 + 10 tol everywhere.
inline ComparisonOutcome comparison_test(const ProblemSpec& p, const BoundaryData& g1,
                                         const BoundaryData& g2) {
    ProblemSpec p1 = p, p2 = p;
    p1.boundary = g1;
    p2.boundary = g2;
    const ScalarField b1 = boundary_field(p1), b2 = boundary_field(p2);
    for (int idx = 0; idx < p.grid.count(); ++idx)
        if (p.grid.is_boundary(idx) && b1[idx] > b2[idx] + 1e-14 * (1.0 + b2[idx]))
            throw std::invalid_argument("comparison_test requires g1 <= g2 on the boundary");
    const SolveResult r1 = solve(p1), r2 = solve(p2);
    ComparisonOutcome out;
    for (int idx = 0; idx < p.grid.count(); ++idx)
        out.worst_gap = std::max(out.worst_gap, r1.u[idx] - r2.u[idx]);
    out.pass = r1.converged && r2.converged && out.worst_gap <= 10.0 * p.knobs.tol_residual;
    return out;
}

/// Worst value of [discrete Laplacian of u - u_+^{gamma-1}] over interior
/// points. Nonpositive up to O(h^2) for every operator normalized so the
/// trace touches F from below at 0.
inline double subharmonic_margin(const ScalarField& u, const Params& params) {
    const Grid& g = u.grid;
    const double gm1 = params.gamma - 1.0;
    double worst = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int idx = 0; idx < g.count(); ++idx) {
        if (!g.is_interior(idx)) continue;
        const int ix = g.ix_of(idx), iy = g.iy_of(idx);
        double lap = (u[g.index(ix - 1, iy)] - 2.0 * u[idx] + u[g.index(ix + 1, iy)]) /
                     (g.h[0] * g.h[0]);
        if (g.dim == 2)
            lap += (u[g.index(ix, iy - 1)] - 2.0 * u[idx] + u[g.index(ix, iy + 1)]) /
                   (g.h[1] * g.h[1]);
        const double rhs = std::pow(std::max(u[idx], 0.0), gm1);
        worst = std::max(worst, lap - rhs);
        any = true;
    }
    return any ? worst : 0.0;
}

}  // namespace ap
