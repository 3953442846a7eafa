#include <doctest.h>

#include "mpiga/linalg.hpp"

#include <random>

using namespace mpiga;
using Eigen::Index;

namespace {

SparseMatrix random_spd(int n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::MatrixXd a(n, n);
    for (Index i = 0; i < a.size(); ++i)
        a.data()[i] = U(rng);
    Eigen::MatrixXd k = a * a.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    return k.sparseView();
}

} // namespace

TEST_CASE("solve_spd small cases")
{
    SparseMatrix i(3, 3);
    i.setIdentity();
    const Eigen::Vector3d f(1, 2, 3);
    CHECK((solve_spd(i, f) - f).norm() < 1e-15);

    Eigen::Matrix2d k;
    k << 2, 1, 1, 2;
    const Eigen::VectorXd u = solve_spd(k.sparseView(), Eigen::Vector2d(1, 1));
    CHECK(u(0) == doctest::Approx(1.0 / 3));
    CHECK(u(1) == doctest::Approx(1.0 / 3));

    Eigen::Matrix2d s;
    s << 1, 1, 1, 1;
    CHECK_THROWS_AS(solve_spd(s.sparseView(), Eigen::Vector2d(1, 0)), LinalgError);
    Eigen::Matrix2d indef;
    indef << 1, 0, 0, -1;
    CHECK_THROWS_AS(solve_spd(indef.sparseView(), Eigen::Vector2d(1, 0)), LinalgError);
}

TEST_CASE("solve_spd residual on random systems")
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int t = 0; t < 50; ++t)
    {
        const int n = 5 + t % 20;
        const SparseMatrix k = random_spd(n, rng);
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i)
            f(i) = U(rng);
        const Eigen::VectorXd u = solve_spd(k, f);
        CHECK((k * u - f).norm() / f.norm() <= 1e-10);
    }
}

TEST_CASE("generalized eigenproblem")
{
    SparseMatrix i(4, 4);
    i.setIdentity();
    const EigenPairs e1 = eig_general(i, i);
    CHECK((e1.values - Eigen::VectorXd::Ones(4)).norm() < 1e-14);

    Eigen::Matrix2d d;
    d << 1, 0, 0, 4;
    SparseMatrix i2(2, 2);
    i2.setIdentity();
    const EigenPairs e2 = eig_general(d.sparseView(), i2);
    CHECK(e2.values(0) == doctest::Approx(1.0));
    CHECK(e2.values(1) == doctest::Approx(4.0));

    std::mt19937 rng(3);
    const SparseMatrix k = random_spd(30, rng);
    const SparseMatrix m = random_spd(30, rng);
    const EigenPairs e = eig_general(k, m, 10);
    REQUIRE(e.values.size() == 10);
    const double kn = Eigen::MatrixXd(k).norm(), mn = Eigen::MatrixXd(m).norm();
    for (Index j = 0; j < 10; ++j)
    {
        const Eigen::VectorXd v = e.vectors.col(j);
        CHECK((k * v - e.values(j) * (m * v)).norm() <= 1e-8 * (kn + e.values(j) * mn) * v.norm());
        if (j > 0)
            CHECK(e.values(j) >= e.values(j - 1));
    }
    const Eigen::MatrixXd g = e.vectors.transpose() * m * e.vectors;
    CHECK((g - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-8);

    Eigen::Matrix2d bad;
    bad << 1, 0, 0, -1;
    CHECK_THROWS_AS(eig_general(i2, bad.sparseView()), LinalgError);
}

TEST_CASE("null-space basis against an SVD rank oracle")
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    std::uniform_int_distribution<int> col(0, 39);
    for (int t = 0; t < 10; ++t)
    {
        // sparse rows plus exact linear combinations of them
        std::vector<Eigen::VectorXd> rows;
        for (int r = 0; r < 8; ++r)
        {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(40);
            for (int k = 0; k < 3; ++k)
                row(col(rng)) = U(rng);
            rows.push_back(row);
        }
        rows.push_back(rows[0] - 2.0 * rows[1]);
        rows.push_back(3.0 * rows[2]);
        Eigen::MatrixXd c(rows.size(), 40);
        for (std::size_t r = 0; r < rows.size(); ++r)
            c.row(static_cast<Index>(r)) = rows[r].transpose();
        const SparseMatrix cs = c.sparseView();
        const SparseMatrix z = nullspace_basis(cs);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
        const Eigen::VectorXd sv = svd.singularValues();
        Index rank = 0;
        for (Index k = 0; k < sv.size(); ++k)
            rank += sv(k) > 1e-10 * sv(0);
        CHECK(z.cols() == 40 - rank);
        const Eigen::MatrixXd zd(z);
        CHECK((c * zd).norm() < 1e-12);
        CHECK((zd.transpose() * zd - Eigen::MatrixXd::Identity(z.cols(), z.cols())).norm() < 1e-12);
    }
}

TEST_CASE("null space of unconstrained and fully constrained systems")
{
    SparseMatrix none(0, 5);
    CHECK(nullspace_basis(none).cols() == 5);
    SparseMatrix all(5, 5);
    all.setIdentity();
    CHECK_THROWS_AS(nullspace_basis(all), LinalgError);
}

TEST_CASE("windowed null space of a large connected block")
{
    // Banded rows over one connected chain of columns, plus dependent rows.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    const Index n = 300;
    std::vector<Eigen::VectorXd> rows;
    for (Index i = 0; i + 4 < n; i += 2)
    {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
        for (Index k = 0; k < 5; ++k)
            row(i + k) = U(rng);
        rows.push_back(row);
    }
    for (std::size_t r = 0; r + 1 < rows.size(); r += 17)
        rows.push_back(rows[r] + 0.5 * rows[r + 1]);
    Eigen::MatrixXd c(static_cast<Index>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r)
        c.row(static_cast<Index>(r)) = rows[r].transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
    const Eigen::VectorXd sv = svd.singularValues();
    Index rank = 0;
    for (Index k = 0; k < sv.size(); ++k)
        rank += sv(k) > 1e-10 * sv(0);

    const SparseMatrix cs = c.sparseView();
    const Eigen::MatrixXd dense(nullspace_basis(cs, 1e-10, 1000));
    const Eigen::MatrixXd windowed(nullspace_basis(cs, 1e-10, 40));
    CHECK(dense.cols() == n - rank);
    CHECK(windowed.cols() == n - rank);
    CHECK((c * windowed).norm() < 1e-10 * c.norm() * windowed.norm());
    Eigen::JacobiSVD<Eigen::MatrixXd> zs(windowed);
    const Eigen::VectorXd s = zs.singularValues();
    CHECK(s(s.size() - 1) > 1e-8 * s(0));
    // Same span: projecting the dense basis onto the windowed one loses nothing.
    const Eigen::MatrixXd q = windowed.householderQr().householderQ() * Eigen::MatrixXd::Identity(n, windowed.cols());
    CHECK((dense - q * (q.transpose() * dense)).norm() < 1e-9);
}

TEST_CASE("solver keeps the matrix for products")
{
    std::mt19937 rng(2);
    const SparseMatrix k = random_spd(12, rng);
    SpdSolver s;
    s.factorize(SparseMatrix(k));
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(12, -1, 1);
    CHECK((s.apply(x) - k * x).norm() < 1e-12 * (k * x).norm());
    CHECK((k * s.solve(x) - x).norm() < 1e-12);
    const SparseMatrix lower = s.take_lower();
    CHECK(lower.nonZeros() == SparseMatrix(k.triangularView<Eigen::Lower>()).nonZeros());
}
