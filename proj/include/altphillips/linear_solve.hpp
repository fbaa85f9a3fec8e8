#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <vector>

#include "altphillips/discretization.hpp"

namespace ap {

/// Direct solver for the frozen-policy linear problem with diagonal
/// absorption,
///   sum_v c_{p(x),v} [u(x+v) + u(x-v) - 2 u(x)] / |vh|^2 - W(x) u(x) = f(x)
/// at interior points, u = g on the boundary, W >= 0.
///
/// 1D: banded (Thomas) elimination. 2D: sparse direct factorization over the
/// interior unknowns. The sparsity pattern (all stencil directions, explicit
/// zeros for unused weights) is analyzed once; each call refactorizes
/// numerically. Single-policy operators assemble a symmetric matrix and use
/// LDLT; families with per-point policies are nonsymmetric and use LU.
class LinearSolver {
  public:
    explicit LinearSolver(const DiscreteOperator& op) : op_(op) {
        row_of_.assign(static_cast<std::size_t>(op.grid.count()), -1);
        for (int idx = 0; idx < op.grid.count(); ++idx) {
            if (op.grid.is_interior(idx)) {
                row_of_[static_cast<std::size_t>(idx)] = static_cast<int>(idx_of_.size());
                idx_of_.push_back(idx);
            }
        }
        symmetric_ = op.policy_count() == 1;
    }

    /// W may be empty (no absorption). f and bdry are full-grid fields; only
    /// interior entries of f and boundary entries of bdry are read.
    ScalarField solve(const std::vector<int>& policy, const std::vector<double>& weight,
                      const ScalarField& f, const ScalarField& bdry) {
        if (op_.grid.dim == 1) return solve_1d(policy, weight, f, bdry);
        return solve_2d(policy, weight, f, bdry);
    }

  private:
    double absorption(const std::vector<double>& weight, int idx) const {
        return weight.empty() ? 0.0 : weight[static_cast<std::size_t>(idx)];
    }

    ScalarField solve_1d(const std::vector<int>& policy, const std::vector<double>& weight,
                         const ScalarField& f, const ScalarField& bdry) {
        const int m = static_cast<int>(idx_of_.size());
        const double len2 = op_.dirs[0].len2;
        std::vector<double> sub(static_cast<std::size_t>(m)), diag(static_cast<std::size_t>(m)),
            sup(static_cast<std::size_t>(m)), rhs(static_cast<std::size_t>(m));
        for (int r = 0; r < m; ++r) {
            const int idx = idx_of_[static_cast<std::size_t>(r)];
            const double c =
                op_.weights[static_cast<std::size_t>(policy[static_cast<std::size_t>(idx)])][0] /
                len2;
            sub[static_cast<std::size_t>(r)] = c;
            sup[static_cast<std::size_t>(r)] = c;
            diag[static_cast<std::size_t>(r)] = -2.0 * c - absorption(weight, idx);
            double b = f[idx];
            if (r == 0) b -= c * bdry[idx - 1];
            if (r == m - 1) b -= c * bdry[idx + 1];
            rhs[static_cast<std::size_t>(r)] = b;
        }
        for (int r = 1; r < m; ++r) {
            const double w =
                sub[static_cast<std::size_t>(r)] / diag[static_cast<std::size_t>(r - 1)];
            diag[static_cast<std::size_t>(r)] -= w * sup[static_cast<std::size_t>(r - 1)];
            rhs[static_cast<std::size_t>(r)] -= w * rhs[static_cast<std::size_t>(r - 1)];
        }
        ScalarField out = bdry;
        std::vector<double> x(static_cast<std::size_t>(m));
        x[static_cast<std::size_t>(m - 1)] =
            rhs[static_cast<std::size_t>(m - 1)] / diag[static_cast<std::size_t>(m - 1)];
        for (int r = m - 2; r >= 0; --r)
            x[static_cast<std::size_t>(r)] =
                (rhs[static_cast<std::size_t>(r)] -
                 sup[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(r + 1)]) /
                diag[static_cast<std::size_t>(r)];
        for (int r = 0; r < m; ++r)
            out[idx_of_[static_cast<std::size_t>(r)]] = x[static_cast<std::size_t>(r)];
        return out;
    }

    ScalarField solve_2d(const std::vector<int>& policy, const std::vector<double>& weight,
                         const ScalarField& f, const ScalarField& bdry) {
        const Grid& g = op_.grid;
        const int m = static_cast<int>(idx_of_.size());
        Eigen::VectorXd rhs(m);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(m) * (2 * op_.dirs.size() + 1));
        for (int r = 0; r < m; ++r) {
            const int idx = idx_of_[static_cast<std::size_t>(r)];
            const int ix = g.ix_of(idx), iy = g.iy_of(idx);
            const auto& w =
                op_.weights[static_cast<std::size_t>(policy[static_cast<std::size_t>(idx)])];
            double diag = -absorption(weight, idx);
            double b = f[idx];
            for (std::size_t d = 0; d < op_.dirs.size(); ++d) {
                const double c = w[d] / op_.dirs[d].len2;
                diag -= 2.0 * c;
                for (int s : {+1, -1}) {
                    const int nb = g.index(ix + s * op_.dirs[d].v[0], iy + s * op_.dirs[d].v[1]);
                    const int col = row_of_[static_cast<std::size_t>(nb)];
                    // Explicit zeros keep the sparsity pattern fixed across
                    // policies and absorption updates.
                    if (col >= 0) trip.emplace_back(r, col, c);
                    else b -= c * bdry[nb];
                }
            }
            trip.emplace_back(r, r, diag);
            rhs[r] = b;
        }
        Eigen::SparseMatrix<double> mat(m, m);
        mat.setFromTriplets(trip.begin(), trip.end());

        Eigen::VectorXd x;
        if (symmetric_) {
            if (!ldlt_) {
                ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
                ldlt_->analyzePattern(mat);
            }
            ldlt_->factorize(mat);
            if (ldlt_->info() != Eigen::Success)
                throw std::runtime_error("LDLT factorization of the frozen-policy system failed");
            x = ldlt_->solve(rhs);
            if (ldlt_->info() != Eigen::Success)
                throw std::runtime_error("LDLT solve failed");
        } else {
            if (!lu_) {
                lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
                lu_->analyzePattern(mat);
            }
            lu_->factorize(mat);
            if (lu_->info() != Eigen::Success)
                throw std::runtime_error("LU factorization of the frozen-policy system failed");
            x = lu_->solve(rhs);
            if (lu_->info() != Eigen::Success)
                throw std::runtime_error("LU solve failed");
        }
        ScalarField out = bdry;
        for (int r = 0; r < m; ++r)
            out[idx_of_[static_cast<std::size_t>(r)]] = x[r];
        return out;
    }

    const DiscreteOperator& op_;
    std::vector<int> row_of_;
    std::vector<int> idx_of_;
    bool symmetric_ = false;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

}  // namespace ap
