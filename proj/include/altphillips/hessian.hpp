#pragma once

#include <stdexcept>

#include "altphillips/field.hpp"
#include "altphillips/sym_matrix.hpp"

namespace ap {

/// Discrete Hessian by second-order central differences; the mixed derivative
/// uses the 4-point cross. Exact for quadratics. Requires the full 3^dim
/// neighborhood of idx on the grid.
inline SymMatrix hessian_central(const ScalarField& u, int idx) {
    const Grid& g = u.grid;
    if (!g.has_full_stencil(idx))
        throw std::out_of_range("hessian_central needs a full interior stencil");
    const int ix = g.ix_of(idx);
    if (g.dim == 1) {
        const double uxx =
            (u[g.index(ix - 1)] - 2.0 * u[idx] + u[g.index(ix + 1)]) / (g.h[0] * g.h[0]);
        return SymMatrix(uxx);
    }
    const int iy = g.iy_of(idx);
    const double uxx =
        (u[g.index(ix - 1, iy)] - 2.0 * u[idx] + u[g.index(ix + 1, iy)]) / (g.h[0] * g.h[0]);
    const double uyy =
        (u[g.index(ix, iy - 1)] - 2.0 * u[idx] + u[g.index(ix, iy + 1)]) / (g.h[1] * g.h[1]);
    const double uxy = (u[g.index(ix + 1, iy + 1)] + u[g.index(ix - 1, iy - 1)] -
                        u[g.index(ix + 1, iy - 1)] - u[g.index(ix - 1, iy + 1)]) /
                       (4.0 * g.h[0] * g.h[1]);
    return SymMatrix(uxx, uxy, uyy);
}

}  // namespace ap
