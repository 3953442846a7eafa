/** @file linalg.cpp

    @brief CHOLMOD-backed solves, LAPACK-backed dense eigen and QR work.
*/

#include "mpiga/linalg.hpp"

#include <Eigen/CholmodSupport>
#include <unsupported/Eigen/SparseExtra>

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mpiga {

using Eigen::Index;

SparseMatrix symmetrize(const SparseMatrix& a)
{
    if (a.rows() != a.cols())
        throw LinalgError("symmetrize: matrix is not square");
    SparseMatrix at = a.transpose();
    SparseMatrix s = 0.5 * (a + at);
    s.makeCompressed();
    return s;
}

struct SpdSolver::Impl
{
    Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> llt;
    SparseMatrix k;
};

SpdSolver::SpdSolver() : m_impl(std::make_unique<Impl>())
{
    m_impl->llt.cholmod().print = 0;
}
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factorize(const SparseMatrix& k)
{
    if (k.rows() != k.cols())
        throw LinalgError("solve_spd: matrix is not square");
    m_impl->k = k.triangularView<Eigen::Lower>(); // the factorization reads the lower half only
    m_impl->llt.compute(m_impl->k);
    if (m_impl->llt.info() != Eigen::Success)
        throw LinalgError("solve_spd: matrix is not positive definite (non-positive pivot)");
}

void SpdSolver::factorize(SparseMatrix&& k)
{
    if (k.rows() != k.cols())
        throw LinalgError("solve_spd: matrix is not square");
    m_impl->k = k.triangularView<Eigen::Lower>();
    k = SparseMatrix();
    m_impl->llt.compute(m_impl->k);
    if (m_impl->llt.info() != Eigen::Success)
        throw LinalgError("solve_spd: matrix is not positive definite (non-positive pivot)");
}

Eigen::VectorXd SpdSolver::apply(const Eigen::VectorXd& x) const
{
    if (x.size() != m_impl->k.cols())
        throw LinalgError("SpdSolver::apply: size mismatch");
    return m_impl->k.selfadjointView<Eigen::Lower>() * x;
}

SparseMatrix SpdSolver::take_lower()
{
    return std::move(m_impl->k);
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& f) const
{
    if (f.size() != m_impl->k.rows())
        throw LinalgError("solve_spd: right-hand side size mismatch");
    Eigen::VectorXd u = m_impl->llt.solve(f);
    const double fn = f.norm();
    if (fn == 0.0)
        return u;
    for (int it = 0; it < 3; ++it)
    {
        const Eigen::VectorXd res = f - m_impl->k.selfadjointView<Eigen::Lower>() * u;
        if (res.norm() <= 1e-12 * fn)
            break;
        u += m_impl->llt.solve(res);
    }
    if (!u.allFinite())
        throw LinalgError("solve_spd: non-finite solution");
    return u;
}

Eigen::VectorXd solve_spd(const SparseMatrix& k, const Eigen::VectorXd& f)
{
    SpdSolver s;
    s.factorize(k);
    return s.solve(f);
}

EigenPairs eig_general(const SparseMatrix& k, const SparseMatrix& m, Index count)
{
    const Index n = k.rows();
    if (k.cols() != n || m.rows() != n || m.cols() != n)
        throw LinalgError("eig_general: size mismatch");
    if (n > kDenseEigenLimit)
        throw LinalgError("eig_general: n = " + std::to_string(n) + " exceeds the dense limit " +
                          std::to_string(kDenseEigenLimit));
    if (count < 0 || count > n)
        count = n;
    Eigen::MatrixXd a = Eigen::MatrixXd(k);
    Eigen::MatrixXd b = Eigen::MatrixXd(m);
    a = 0.5 * (a + a.transpose()).eval();
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::VectorXd w(n);
    const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', static_cast<lapack_int>(n), a.data(),
                                           static_cast<lapack_int>(n), b.data(), static_cast<lapack_int>(n), w.data());
    if (info > n)
        throw LinalgError("eig_general: mass matrix is not positive definite");
    if (info != 0)
        throw LinalgError("eig_general: LAPACK dsygvd failed with info " + std::to_string(info));
    return {w.head(count), a.leftCols(count)};
}

namespace {

int find_root(std::vector<int>& parent, int x)
{
    while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
    return x;
}

/// Orthonormal null-space basis of a dense block (rows x cols).
Eigen::MatrixXd dense_nullspace(const Eigen::MatrixXd& a, double tol)
{
    const Index r = a.rows(), c = a.cols();
    // A^T P = Q R, the trailing columns of Q span ker(A).
    Eigen::MatrixXd at = Eigen::MatrixXd::Zero(c, std::max(r, c));
    at.leftCols(r) = a.transpose();
    std::vector<lapack_int> jpvt(std::max(r, c), 0);
    Eigen::VectorXd tau(std::max<Index>(1, std::min(r, c)));
    lapack_int info = LAPACKE_dgeqp3(LAPACK_COL_MAJOR, static_cast<lapack_int>(c), static_cast<lapack_int>(r),
                                     at.data(), static_cast<lapack_int>(c), jpvt.data(), tau.data());
    if (info != 0)
        throw LinalgError("nullspace_basis: dgeqp3 failed");
    const Index kmax = std::min(r, c);
    Index rank = 0;
    const double r00 = kmax > 0 ? std::abs(at(0, 0)) : 0.0;
    while (rank < kmax && std::abs(at(rank, rank)) > tol * r00)
        ++rank;
    info = LAPACKE_dorgqr(LAPACK_COL_MAJOR, static_cast<lapack_int>(c), static_cast<lapack_int>(c),
                          static_cast<lapack_int>(kmax), at.data(), static_cast<lapack_int>(c), tau.data());
    if (info != 0)
        throw LinalgError("nullspace_basis: dorgqr failed");
    return at.block(0, rank, c, c - rank);
}

/// Numerical rank of a dense block, |R_kk| > tol |R_00| in a pivoted QR.
Index dense_rank(Eigen::MatrixXd a, double tol)
{
    const Index r = a.rows(), c = a.cols();
    if (r == 0 || c == 0)
        return 0;
    std::vector<lapack_int> jpvt(c, 0);
    Eigen::VectorXd tau(std::min(r, c));
    const lapack_int info = LAPACKE_dgeqp3(LAPACK_COL_MAJOR, static_cast<lapack_int>(r), static_cast<lapack_int>(c),
                                           a.data(), static_cast<lapack_int>(r), jpvt.data(), tau.data());
    if (info != 0)
        throw LinalgError("nullspace_basis: dgeqp3 failed");
    const double r00 = std::abs(a(0, 0));
    Index rank = 0;
    while (rank < std::min(r, c) && std::abs(a(rank, rank)) > tol * r00)
        ++rank;
    return rank;
}

/// Leading `count` columns of the orthogonal factor of a pivoted QR.
Eigen::MatrixXd leading_basis(const Eigen::MatrixXd& y, double abs_tol)
{
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(y);
    const Eigen::MatrixXd r = qr.matrixR().triangularView<Eigen::Upper>();
    Index count = 0;
    while (count < std::min(r.rows(), r.cols()) && std::abs(r(count, count)) > abs_tol)
        ++count;
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), count);
}

/// Null space of one coupled block (rows already unit length) with mostly
/// local support. Columns are visited in breadth-first order and grouped into
/// clusters P_1, P_2, ... with prefixes U_k = P_1 + ... + P_k. Step k adds
/// the null vectors supported in a window W of P_k (P_k plus a few graph hops
/// into U_(k-1)) taken modulo those supported in W minus P_k. A vector of
/// the latter kind lies in the span of the previous prefix, so the collected
/// vectors are linearly independent. Directions that no window captures are
/// completed from the dense basis.
SparseMatrix windowed_nullspace(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, double tol, int cluster,
                                int halo)
{
    const Index nc = a.cols();
    const Eigen::MatrixXd ad(a);
    const Index d = nc - dense_rank(ad, tol);
    const SparseMatrix acol(a);

    auto for_each_neighbour = [&](Index j, auto fn) {
        for (SparseMatrix::InnerIterator it(acol, j); it; ++it)
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator jt(a, it.row()); jt; ++jt)
                fn(jt.col());
    };

    // breadth-first column order, restarted for disconnected pieces
    std::vector<Index> order;
    std::vector<Index> rank_of(nc, -1);
    for (Index s = 0; s < nc; ++s)
    {
        if (rank_of[s] >= 0)
            continue;
        rank_of[s] = static_cast<Index>(order.size());
        order.push_back(s);
        for (std::size_t q = order.size() - 1; q < order.size(); ++q)
            for_each_neighbour(order[q], [&](Index k) {
                if (rank_of[k] < 0)
                {
                    rank_of[k] = static_cast<Index>(order.size());
                    order.push_back(k);
                }
            });
    }

    // null space of the rows touching `cols`, restricted to `cols`
    std::vector<Index> pos(nc, -1), row_pos(a.rows(), -1);
    auto local_null = [&](const std::vector<Index>& cols) {
        for (std::size_t q = 0; q < cols.size(); ++q)
            pos[cols[q]] = static_cast<Index>(q);
        std::vector<Index> rows;
        for (Index j : cols)
            for (SparseMatrix::InnerIterator it(acol, j); it; ++it)
                if (row_pos[it.row()] < 0)
                {
                    row_pos[it.row()] = static_cast<Index>(rows.size());
                    rows.push_back(it.row());
                }
        Eigen::MatrixXd aloc = Eigen::MatrixXd::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
        for (Index i : rows)
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, i); it; ++it)
                if (pos[it.col()] >= 0)
                    aloc(row_pos[i], pos[it.col()]) = it.value();
        for (Index j : cols)
            pos[j] = -1;
        for (Index i : rows)
            row_pos[i] = -1;
        return rows.empty() ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(aloc.cols(), aloc.cols()))
                            : dense_nullspace(aloc, tol);
    };

    std::vector<Triplet> trip;
    Index found = 0;
    std::vector<char> in_win(nc, 0);
    for (Index begin = 0; begin < nc; begin += cluster)
    {
        const Index end = std::min<Index>(nc, begin + cluster);
        std::vector<Index> win(order.begin() + begin, order.begin() + end);
        for (Index j : win)
            in_win[j] = 1;
        for (int h = 0, from = 0; h < halo; ++h)
        {
            const int to = static_cast<int>(win.size());
            for (int q = from; q < to; ++q)
                for_each_neighbour(win[q], [&](Index k) {
                    if (!in_win[k] && rank_of[k] < begin)
                    {
                        in_win[k] = 1;
                        win.push_back(k);
                    }
                });
            from = to;
        }
        std::sort(win.begin(), win.end());
        std::vector<Index> old;
        for (Index j : win)
            if (rank_of[j] < begin)
                old.push_back(j);

        Eigen::MatrixXd y = local_null(win);
        const Eigen::MatrixXd yo = old.empty() ? Eigen::MatrixXd(0, 0) : local_null(old);
        const Index fresh = y.cols() - yo.cols();
        if (fresh > 0)
        {
            if (yo.cols() > 0)
            {
                Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Index>(win.size()), yo.cols());
                for (std::size_t q = 0, o = 0; q < win.size() && o < old.size(); ++q)
                    if (win[q] == old[o])
                        e.row(static_cast<Index>(q)) = yo.row(static_cast<Index>(o++));
                y -= e * (e.transpose() * y);
            }
            const Eigen::MatrixXd nv = leading_basis(y, 1e-8);
            for (Index b = 0; b < std::min(fresh, nv.cols()); ++b, ++found)
                for (std::size_t q = 0; q < win.size(); ++q)
                    if (std::abs(nv(static_cast<Index>(q), b)) > 1e-14)
                        trip.emplace_back(win[q], found, nv(static_cast<Index>(q), b));
        }
        for (Index j : win)
            in_win[j] = 0;
    }

    SparseMatrix v(nc, found);
    v.setFromTriplets(trip.begin(), trip.end());
    if (found == d)
        return v;
    if (found > d)
        return Eigen::MatrixXd(dense_nullspace(ad, tol)).sparseView();

    // complete with the part of the dense basis orthogonal to the local vectors
    Eigen::MatrixXd q = dense_nullspace(ad, tol);
    if (found > 0)
    {
        const SparseMatrix g = SparseMatrix(v.transpose()) * v;
        const Eigen::SimplicialLDLT<SparseMatrix> ldlt(g);
        const Eigen::MatrixXd coef = ldlt.solve(Eigen::MatrixXd(v.transpose() * q));
        q -= v * coef;
    }
    const Eigen::MatrixXd extra = leading_basis(q, 1e-8);
    for (Index k = 0; k < std::min(d - found, extra.cols()); ++k)
        for (Index r = 0; r < nc; ++r)
            if (std::abs(extra(r, k)) > 1e-14)
                trip.emplace_back(r, found + k, extra(r, k));
    SparseMatrix out(nc, found + std::min(d - found, extra.cols()));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

} // namespace

SparseMatrix nullspace_basis(const SparseMatrix& c, double tol, Index local_threshold)
{
    const Index n = c.cols();
    Eigen::SparseMatrix<double, Eigen::RowMajor> cr = c;
    cr.prune(0.0);

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<bool> involved(n, false);
    for (Index i = 0; i < cr.rows(); ++i)
    {
        int first = -1;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(cr, i); it; ++it)
        {
            const int j = static_cast<int>(it.col());
            involved[j] = true;
            if (first < 0)
                first = j;
            else
                parent[find_root(parent, j)] = find_root(parent, first);
        }
    }

    // component id per involved column, rows per component
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> comp_cols;
    std::vector<int> root_comp(n, -1);
    for (Index j = 0; j < n; ++j)
    {
        if (!involved[j])
            continue;
        const int rt = find_root(parent, static_cast<int>(j));
        if (root_comp[rt] < 0)
        {
            root_comp[rt] = static_cast<int>(comp_cols.size());
            comp_cols.emplace_back();
        }
        comp[j] = root_comp[rt];
        comp_cols[comp[j]].push_back(static_cast<int>(j));
    }
    std::vector<std::vector<int>> comp_rows(comp_cols.size());
    for (Index i = 0; i < cr.rows(); ++i)
    {
        Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(cr, i);
        if (it)
            comp_rows[comp[it.col()]].push_back(static_cast<int>(i));
    }

    std::vector<Triplet> trip;
    Index col = 0;
    for (Index j = 0; j < n; ++j)
        if (!involved[j])
            trip.emplace_back(j, col++, 1.0);

    std::vector<int> local(n, -1);
    for (std::size_t k = 0; k < comp_cols.size(); ++k)
    {
        const auto& cols = comp_cols[k];
        const auto& rows = comp_rows[k];
        for (std::size_t q = 0; q < cols.size(); ++q)
            local[cols[q]] = static_cast<int>(q);
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
        for (std::size_t q = 0; q < rows.size(); ++q)
        {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(cr, rows[q]); it; ++it)
                a(static_cast<Index>(q), local[it.col()]) = it.value();
            const double nrm = a.row(static_cast<Index>(q)).norm();
            if (nrm > 0.0)
                a.row(static_cast<Index>(q)) /= nrm;
        }
        if (static_cast<Index>(cols.size()) > local_threshold)
        {
            const Eigen::SparseMatrix<double, Eigen::RowMajor> as = a.sparseView();
            const SparseMatrix z = windowed_nullspace(as, tol, 32, 3);
            for (Index b = 0; b < z.outerSize(); ++b, ++col)
                for (SparseMatrix::InnerIterator it(z, b); it; ++it)
                    trip.emplace_back(cols[it.row()], col, it.value());
            continue;
        }
        const Eigen::MatrixXd z = dense_nullspace(a, tol);
        for (Index b = 0; b < z.cols(); ++b, ++col)
            for (Index q = 0; q < z.rows(); ++q)
                if (z(q, b) != 0.0)
                    trip.emplace_back(cols[q], col, z(q, b));
    }
    if (col == 0 && n > 0)
        throw LinalgError("nullspace_basis: constraints leave an empty null space");
    SparseMatrix zs(n, col);
    zs.setFromTriplets(trip.begin(), trip.end());
    zs.makeCompressed();
    return zs;
}

void write_matrix_market(const std::string& path, const SparseMatrix& a)
{
    if (!Eigen::saveMarket(a, path))
        throw LinalgError("cannot write " + path);
}

} // namespace mpiga
