#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace ap {

/// Symmetric d-by-d matrix, d in {1,2}. Only the upper triangle is stored, so
/// symmetry is exact by construction. Units: value / length^2 when holding a
/// Hessian.
struct SymMatrix {
    int dim = 1;
    double xx = 0.0;
    double xy = 0.0;  // unused when dim == 1
    double yy = 0.0;  // unused when dim == 1

    SymMatrix() = default;
    explicit SymMatrix(double m11) : dim(1), xx(m11) {}
    SymMatrix(double m11, double m12, double m22) : dim(2), xx(m11), xy(m12), yy(m22) {}

    static SymMatrix zero(int d) { return d == 1 ? SymMatrix(0.0) : SymMatrix(0.0, 0.0, 0.0); }
    static SymMatrix identity(int d) { return d == 1 ? SymMatrix(1.0) : SymMatrix(1.0, 0.0, 1.0); }
    static SymMatrix diagonal(int d, double a, double b = 0.0) {
        return d == 1 ? SymMatrix(a) : SymMatrix(a, 0.0, b);
    }
    /// Rank-one matrix e (x) e for a direction e (need not be unit length).
    static SymMatrix outer(int d, const std::array<double, 2>& e) {
        return d == 1 ? SymMatrix(e[0] * e[0]) : SymMatrix(e[0] * e[0], e[0] * e[1], e[1] * e[1]);
    }

    double trace() const { return dim == 1 ? xx : xx + yy; }

    /// Eigenvalues in ascending order (second entry unused for dim == 1).
    std::array<double, 2> eigenvalues() const {
        if (dim == 1) return {xx, 0.0};
        const double mean = 0.5 * (xx + yy);
        const double radius = std::hypot(0.5 * (xx - yy), xy);
        return {mean - radius, mean + radius};
    }

    double min_eigenvalue() const { return eigenvalues()[0]; }

    double spectral_norm() const {
        const auto ev = eigenvalues();
        return dim == 1 ? std::abs(ev[0]) : std::max(std::abs(ev[0]), std::abs(ev[1]));
    }

    /// Quadratic form e^T M e.
    double form(const std::array<double, 2>& e) const {
        if (dim == 1) return xx * e[0] * e[0];
        return xx * e[0] * e[0] + 2.0 * xy * e[0] * e[1] + yy * e[1] * e[1];
    }

    /// trace(A * M) for symmetric A, M.
    double dot(const SymMatrix& other) const {
        require_same_dim(other);
        if (dim == 1) return xx * other.xx;
        return xx * other.xx + 2.0 * xy * other.xy + yy * other.yy;
    }

    SymMatrix operator+(const SymMatrix& o) const {
        require_same_dim(o);
        return dim == 1 ? SymMatrix(xx + o.xx) : SymMatrix(xx + o.xx, xy + o.xy, yy + o.yy);
    }
    SymMatrix operator-(const SymMatrix& o) const {
        require_same_dim(o);
        return dim == 1 ? SymMatrix(xx - o.xx) : SymMatrix(xx - o.xx, xy - o.xy, yy - o.yy);
    }
    SymMatrix operator*(double t) const {
        return dim == 1 ? SymMatrix(t * xx) : SymMatrix(t * xx, t * xy, t * yy);
    }

    void require_same_dim(const SymMatrix& o) const {
        if (dim != o.dim) throw std::invalid_argument("symmetric matrix dimension mismatch");
    }
};

inline SymMatrix operator*(double t, const SymMatrix& m) { return m * t; }

}  // namespace ap
