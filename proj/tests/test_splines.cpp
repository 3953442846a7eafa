#include <doctest.h>

#include "mpiga/splines.hpp"

#include <random>

using namespace mpiga;

namespace {

// Plain Cox-de Boor recursion with the right-closed last span.
double cox_de_boor(const std::vector<double>& k, int i, int p, double t)
{
    if (p == 0)
    {
        const bool last = t == k.back();
        if (last)
            return (k[i] < t && k[i + 1] == t) ? 1.0 : 0.0;
        return (k[i] <= t && t < k[i + 1]) ? 1.0 : 0.0;
    }
    double a = 0.0, b = 0.0;
    if (k[i + p] > k[i])
        a = (t - k[i]) / (k[i + p] - k[i]) * cox_de_boor(k, i, p - 1, t);
    if (k[i + p + 1] > k[i + 1])
        b = (k[i + p + 1] - t) / (k[i + p + 1] - k[i + 1]) * cox_de_boor(k, i + 1, p - 1, t);
    return a + b;
}

double full_value(const BasisSpec1D& s, Index fn, double t, int deriv)
{
    const BasisEval e = eval_basis(s, t, deriv);
    const Index first = e.firstIndex(s.degree());
    if (fn < first || fn > first + s.degree())
        return 0.0;
    return e.values(deriv, fn - first);
}

} // namespace

TEST_CASE("uniform knot vectors")
{
    const BasisSpec1D b = BasisSpec1D::uniform(3, 4, 1);
    CHECK(b.knots().size() == 4 + 4 + 3 * 2);
    CHECK(b.size() == 4 + 3 * 2);
    CHECK(b.regularity() == 1);
    CHECK(b.numElements() == 4);
    CHECK(BasisSpec1D::uniform(2, 1, 1).size() == 3);
}

TEST_CASE("invalid knot vectors are rejected")
{
    CHECK_THROWS_AS(BasisSpec1D(2, {0, 0, 1, 1}), SplineError);
    CHECK_THROWS_AS(BasisSpec1D(1, {0, 0, 0.5, 0.5, 0.5, 1, 1}), SplineError);
    CHECK_THROWS_AS(BasisSpec1D(1, {0, 0, 0.7, 0.5, 1, 1}), SplineError);
}

TEST_CASE("basis values match Cox-de Boor")
{
    const BasisSpec1D b(3, {0, 0, 0, 0, 0.2, 0.5, 0.5, 0.7, 1, 1, 1, 1});
    for (double t : {0.0, 0.1, 0.2, 0.35, 0.5, 0.6, 0.99, 1.0})
    {
        double sum = 0.0;
        for (Index i = 0; i < b.size(); ++i)
        {
            const double v = full_value(b, i, t, 0);
            CHECK(v == doctest::Approx(cox_de_boor(b.knots(), static_cast<int>(i), 3, t)).epsilon(1e-13));
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("basis derivatives match finite differences")
{
    const BasisSpec1D b = BasisSpec1D::uniform(4, 3, 2);
    const double h = 1e-5;
    for (double t : {0.13, 0.41, 0.77})
        for (Index i = 0; i < b.size(); ++i)
            for (int d = 1; d <= 3; ++d)
            {
                const double fd = (full_value(b, i, t + h, d - 1) - full_value(b, i, t - h, d - 1)) / (2 * h);
                CHECK(full_value(b, i, t, d) == doctest::Approx(fd).epsilon(1e-6).scale(1e3));
            }
}

TEST_CASE("knot insertion and elevation keep the curve")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    const BasisSpec1D b = BasisSpec1D::uniform(2, 3, 1);
    Eigen::MatrixXd c(b.size(), 2);
    for (Index i = 0; i < c.size(); ++i)
        c.data()[i] = U(rng);
    std::vector<double> pts;
    for (int k = 0; k <= 40; ++k)
        pts.push_back(k / 40.0);
    const Eigen::MatrixXd ref = eval_spline(b, c, pts);

    const auto [bi, ci] = insert_knots(b, c, {0.1, 0.5, 0.5});
    CHECK((eval_spline(bi, ci, pts) - ref).norm() < 1e-12);

    const auto [be, ce] = elevate_degree(b, c);
    CHECK(be.degree() == 3);
    CHECK(be.regularity() == 1);
    CHECK((eval_spline(be, ce, pts) - ref).norm() < 1e-12);

    const BasisSpec1D target = BasisSpec1D::uniform(4, 6, 1);
    const Eigen::MatrixXd T = transfer_matrix(b, target);
    CHECK((eval_spline(target, T * c, pts) - ref).norm() < 1e-11);
    CHECK(eval_spline(target, T * c, pts, 1).isApprox(eval_spline(b, c, pts, 1), 1e-10));

    CHECK_THROWS_AS(transfer_matrix(target, b), SplineError);
}

TEST_CASE("tensor basis slots")
{
    const TensorBasisSpec s{BasisSpec1D::uniform(2, 2, 1), BasisSpec1D::uniform(3, 1, 2)};
    const TensorBasisEval e = eval_tensor_basis(s, 0.3, 0.6, 2);
    CHECK(e.indices.size() == 12);
    CHECK(e.values.rows() == 6);
    CHECK(e.values.row(0).sum() == doctest::Approx(1.0));
    CHECK(e.values.row(deriv_slot(1, 0)).sum() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.values.row(deriv_slot(1, 1)).sum() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(deriv_slot(0, 3) == 9);
}
