#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "altphillips/field.hpp"
#include "altphillips/params.hpp"
#include "altphillips/sym_matrix.hpp"

namespace ap {

enum class OperatorKind { Trace, PucciPlus, Bellman };

inline const char* kind_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::Trace: return "trace";
        case OperatorKind::PucciPlus: return "pucci_plus";
        case OperatorKind::Bellman: return "bellman";
    }
    return "?";
}

/// Description of a convex, positively 1-homogeneous, uniformly elliptic
/// operator F with F(0)=0:
///   Trace      F(M) = tr M
///   PucciPlus  F(M) = sup_{(1/L)I <= A <= L I} tr(AM)
///   Bellman    F(M) = max_alpha tr(A_alpha M) over a finite family
/// Bellman families must contain the identity (so the trace operator is a
/// sub-differential at 0) and have spectra inside [1/lambda, lambda].
struct OperatorSpec {
    OperatorKind kind = OperatorKind::Trace;
    int dim = 1;
    double lambda = 1.0;
    std::vector<SymMatrix> family;  // Bellman only

    static OperatorSpec trace(int dim, double lambda = 1.0) {
        OperatorSpec s;
        s.kind = OperatorKind::Trace;
        s.dim = dim;
        s.lambda = lambda;
        s.check_lambda();
        return s;
    }

    static OperatorSpec pucci_plus(int dim, double lambda) {
        OperatorSpec s;
        s.kind = OperatorKind::PucciPlus;
        s.dim = dim;
        s.lambda = lambda;
        s.check_lambda();
        return s;
    }

    static OperatorSpec bellman(int dim, double lambda, std::vector<SymMatrix> family) {
        OperatorSpec s;
        s.kind = OperatorKind::Bellman;
        s.dim = dim;
        s.lambda = lambda;
        s.family = std::move(family);
        s.check_lambda();
        if (s.family.empty()) throw std::invalid_argument("Bellman family must be nonempty");
        bool has_identity = false;
        for (const auto& a : s.family) {
            if (a.dim != dim) throw std::invalid_argument("Bellman family dimension mismatch");
            const auto ev = a.eigenvalues();
            const double lo = ev[0];
            const double hi = dim == 2 ? ev[1] : ev[0];
            const double tol = 1e-10 * s.lambda;
            if (lo < 1.0 / s.lambda - tol || hi > s.lambda + tol)
                throw std::invalid_argument(
                    "Bellman family member has spectrum outside [1/lambda, lambda]: eigenvalues " +
                    std::to_string(lo) + ", " + std::to_string(hi));
            const SymMatrix d = a - SymMatrix::identity(dim);
            if (d.spectral_norm() <= 1e-12) has_identity = true;
        }
        if (!has_identity)
            throw std::invalid_argument(
                "Bellman family must contain the identity matrix (trace normalization at 0)");
        return s;
    }

    void check_lambda() const {
        if (!(lambda >= 1.0))
            throw std::invalid_argument("operator ellipticity constant must be >= 1");
        if (dim != 1 && dim != 2) throw std::invalid_argument("operator dimension must be 1 or 2");
    }
};

inline double evaluate(const OperatorSpec& spec, const SymMatrix& m) {
    if (m.dim != spec.dim) throw std::invalid_argument("operator/matrix dimension mismatch");
    switch (spec.kind) {
        case OperatorKind::Trace:
            return m.trace();
        case OperatorKind::PucciPlus: {
            const auto ev = m.eigenvalues();
            double out = ev[0] > 0.0 ? spec.lambda * ev[0] : ev[0] / spec.lambda;
            if (spec.dim == 2) out += ev[1] > 0.0 ? spec.lambda * ev[1] : ev[1] / spec.lambda;
            return out;
        }
        case OperatorKind::Bellman: {
            double best = spec.family.front().dot(m);
            for (std::size_t a = 1; a < spec.family.size(); ++a)
                best = std::max(best, spec.family[a].dot(m));
            return best;
        }
    }
    return 0.0;
}

/// A linear operator S_M(N) = tr(A* N) touching F from below at M:
/// tr(A* M) = F(M) and tr(A* N) <= F(M+N) - F(M) for all symmetric N.
/// For Bellman, index is the argmax (lowest on ties); -1 otherwise.
struct SubDifferentialChoice {
    SymMatrix matrix;
    int index = -1;
};

inline SubDifferentialChoice sub_differential(const OperatorSpec& spec, const SymMatrix& m) {
    if (m.dim != spec.dim) throw std::invalid_argument("operator/matrix dimension mismatch");
    switch (spec.kind) {
        case OperatorKind::Trace:
            return {SymMatrix::identity(spec.dim), -1};
        case OperatorKind::PucciPlus: {
            // A* = L on the nonnegative eigenspace of M, 1/L on the rest.
            if (spec.dim == 1)
                return {SymMatrix(m.xx > 0.0 ? spec.lambda : 1.0 / spec.lambda), -1};
            const auto ev = m.eigenvalues();
            const double w0 = ev[0] > 0.0 ? spec.lambda : 1.0 / spec.lambda;
            const double w1 = ev[1] > 0.0 ? spec.lambda : 1.0 / spec.lambda;
            // Eigenvector for ev[1]; degenerate M is isotropic, any basis works.
            double vx = m.xy, vy = ev[1] - m.xx;
            double norm = std::hypot(vx, vy);
            if (norm < 1e-300) { vx = 1.0; vy = 0.0; norm = 1.0; }
            vx /= norm;
            vy /= norm;
            const SymMatrix p1 = SymMatrix::outer(2, {vx, vy});
            const SymMatrix p0 = SymMatrix::identity(2) - p1;
            return {w1 * p1 + w0 * p0, -1};
        }
        case OperatorKind::Bellman: {
            int best = 0;
            double val = spec.family.front().dot(m);
            for (int a = 1; a < static_cast<int>(spec.family.size()); ++a) {
                const double v = spec.family[static_cast<std::size_t>(a)].dot(m);
                if (v > val) { val = v; best = a; }
            }
            return {spec.family[static_cast<std::size_t>(best)], best};
        }
    }
    return {SymMatrix::identity(spec.dim), -1};
}

/// Randomized check of uniform ellipticity in the spectral norm,
///   (1/L) |P| <= F(M+P) - F(M) <= L_eff |P|,  P >= 0.
/// The two-sided bound holds with L_eff = d * lambda for all kinds housed
/// here (tr P <= d |P|); for Trace with lambda = 1 this is the usual
/// effective constant d.
struct EllipticityReport {
    bool pass = false;
    int trials = 0;
    double lower_margin = 0.0;  // min over trials of increment / |P|
    double upper_margin = 0.0;  // max over trials of increment / |P|
    double lower_bound = 0.0;   // 1/lambda
    double upper_bound = 0.0;   // d*lambda
};

namespace detail {

inline SymMatrix random_symmetric(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (dim == 1) return SymMatrix(gauss(rng));
    return SymMatrix(gauss(rng), gauss(rng), gauss(rng));
}

/// Random PSD matrix with unit spectral norm (B^T B, rescaled).
inline SymMatrix random_psd_unit(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        if (dim == 1) {
            const double b = gauss(rng);
            if (b * b > 1e-8) return SymMatrix(1.0);
        } else {
            const double b11 = gauss(rng), b12 = gauss(rng), b21 = gauss(rng), b22 = gauss(rng);
            SymMatrix p(b11 * b11 + b21 * b21, b11 * b12 + b21 * b22, b12 * b12 + b22 * b22);
            const double norm = p.spectral_norm();
            if (norm > 1e-8) return p * (1.0 / norm);
        }
    }
}

}  // namespace detail

inline EllipticityReport ellipticity_check(const OperatorSpec& spec, int trials,
                                           std::uint64_t rng_seed) {
    if (trials < 1) throw std::invalid_argument("ellipticity_check needs at least one trial");
    std::mt19937_64 rng(rng_seed);
    EllipticityReport rep;
    rep.trials = trials;
    rep.lower_bound = 1.0 / spec.lambda;
    rep.upper_bound = spec.dim * spec.lambda;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const SymMatrix m = detail::random_symmetric(spec.dim, rng) * 3.0;
        const SymMatrix p = detail::random_psd_unit(spec.dim, rng);
        const double inc = evaluate(spec, m + p) - evaluate(spec, m);
        lo = std::min(lo, inc);
        hi = std::max(hi, inc);
    }
    rep.lower_margin = lo;
    rep.upper_margin = hi;
    const double slack = 1e-9 * rep.upper_bound;
    rep.pass = lo >= rep.lower_bound - slack && hi <= rep.upper_bound + slack;
    return rep;
}

/// Rescaled operator F_r(M) = r^{-(beta-2)} F(r^{beta-2} M). Every kind housed
/// here is positively homogeneous, so F_r = F identically; the operation
/// exists so rescaling experiments pass through it explicitly.
inline OperatorSpec rescale_operator(const OperatorSpec& spec, double r, double /*beta*/) {
    if (!(r > 0.0)) throw std::invalid_argument("rescale_operator requires r > 0");
    return spec;
}

/// Coefficient of the half-space solution c (x.e)_+^beta, determined by
/// c^{2-gamma} beta (beta-1) F(e(x)e) = 1.
inline double halfspace_coefficient(const OperatorSpec& spec, double gamma,
                                    const std::array<double, 2>& e) {
    const double beta = beta_of(gamma);
    const double fe = evaluate(spec, SymMatrix::outer(spec.dim, e));
    if (!(fe > 0.0))
        throw std::domain_error("operator is not positive on rank-one matrices; F(e x e) = " +
                                std::to_string(fe));
    return std::pow(beta * (beta - 1.0) * fe, -1.0 / (2.0 - gamma));
}

/// Exact solution c (x.e)_+^beta sampled on a grid.
inline ScalarField halfspace_profile(const OperatorSpec& spec, double gamma,
                                     const std::array<double, 2>& e, const Grid& grid) {
    const double beta = beta_of(gamma);
    const double c = halfspace_coefficient(spec, gamma, e);
    return ScalarField::sample(grid, [&](const std::array<double, 2>& x) {
        const double t = x[0] * e[0] + (grid.dim == 2 ? x[1] * e[1] : 0.0);
        return t > 0.0 ? c * std::pow(t, beta) : 0.0;
    });
}

}  // namespace ap
