/** @file linalg.hpp

    @brief Sparse SPD solves, dense generalized eigenproblems and sparse
    null-space bases.
*/

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <stdexcept>
#include <string>

namespace mpiga {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

class LinalgError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// (A + A^T)/2, compressed.
SparseMatrix symmetrize(const SparseMatrix& a);

/// Sparse Cholesky factorization kept for repeated solves.
class SpdSolver
{
public:
    SpdSolver();
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    /// Throws LinalgError when K is not positive definite.
    void factorize(const SparseMatrix& k);
    /// Same, releasing `k` once its lower triangle is copied.
    void factorize(SparseMatrix&& k);
    Eigen::VectorXd solve(const Eigen::VectorXd& f) const;
    /// K x with the factorized matrix.
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    /// Moves the stored lower triangle of K out; solve() and apply() are
    /// unavailable afterwards.
    SparseMatrix take_lower();

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

/// Solves K u = f for symmetric positive definite K. A couple of refinement
/// steps are taken if the relative residual exceeds 1e-10.
Eigen::VectorXd solve_spd(const SparseMatrix& k, const Eigen::VectorXd& f);

struct EigenPairs
{
    Eigen::VectorXd values;  ///< ascending
    Eigen::MatrixXd vectors; ///< M-orthonormal columns
};

/// Largest size accepted by the dense generalized eigensolver.
inline constexpr Eigen::Index kDenseEigenLimit = 6000;

/// K v = lambda M v with K symmetric and M SPD. `count` < 0 returns all pairs.
EigenPairs eig_general(const SparseMatrix& k, const SparseMatrix& m, Eigen::Index count = -1);

/// Basis Z of ker(C), returned sparse with C.cols() rows.
/// Columns of C that no row touches map to unit columns; the coupled columns
/// are split into connected components. A component with at most
/// `local_threshold` columns gets an orthonormal basis from a dense
/// column-pivoted QR. Larger components are covered by overlapping windows
/// whose local null spaces give locally supported vectors (orthonormal within
/// each window); directions no window captures are completed from the dense
/// basis. Rank is decided by |R_kk| > tol |R_00| after scaling rows to unit
/// length.
SparseMatrix nullspace_basis(const SparseMatrix& c, double tol = 1e-10, Eigen::Index local_threshold = 400);

/// Matrix Market coordinate file.
void write_matrix_market(const std::string& path, const SparseMatrix& a);

} // namespace mpiga
