#include <doctest.h>

#include "mpiga/quadrature.hpp"
#include "mpiga/smoothspace.hpp"

#include <random>
#include <set>

using namespace mpiga;

namespace {

MultiPatch two_squares(int p, int r, int n)
{
    std::array<Eigen::VectorXd, 4> a{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
                                     Eigen::Vector2d(1, 1)};
    std::array<Eigen::VectorXd, 4> b{Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(1, 1),
                                     Eigen::Vector2d(2, 1)};
    return refine_to(detect_topology({make_bilinear_patch(a), make_bilinear_patch(b)}), p, r, n);
}

/// Merged coefficients of a function interpolated at every patch's Greville grid.
template <class F>
Eigen::VectorXd interpolate_merged(const MultiPatch& mp, const ExtractionMap& map, F f)
{
    Eigen::VectorXd m = Eigen::VectorXd::Zero(map.n_merged);
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Patch& p = mp.patches[k];
        const auto gu = greville_points(p.basis.u), gv = greville_points(p.basis.v);
        Eigen::MatrixXd vals(gu.size(), gv.size());
        for (std::size_t j = 0; j < gv.size(); ++j)
            for (std::size_t i = 0; i < gu.size(); ++i)
            {
                const Eigen::VectorXd x = eval_geometry(p, gu[i], gv[j], 0).point();
                vals(i, j) = f(x(0), x(1));
            }
        const Eigen::MatrixXd au = collocation_matrix(p.basis.u, gu), av = collocation_matrix(p.basis.v, gv);
        const Eigen::MatrixXd c = av.partialPivLu().solve(au.partialPivLu().solve(vals).transpose()).transpose();
        for (Index j = 0; j < c.cols(); ++j)
            for (Index i = 0; i < c.rows(); ++i)
                m(map.merged_index(k, p.basis.index(i, j))) = c(i, j);
    }
    return m;
}

Eigen::Vector2d gradient(const Patch& p, const Eigen::VectorXd& coeffs, double u, double v)
{
    const PhysicalEval e = physical_basis(p, u, v, 1);
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (std::size_t f = 0; f < e.indices.size(); ++f)
        g += coeffs(e.indices[f]) * Eigen::Vector2d(e.values(1, f), e.values(2, f));
    return g;
}

} // namespace

TEST_CASE("identity and C0 maps")
{
    const MultiPatch sq = refine_to(make_unit_square(), 2, 1, 3);
    const ExtractionMap id = build_identity_map(sq);
    CHECK(id.kind == CouplingKind::SinglePatch);
    CHECK(id.n_global() == 25);
    const ExtractionMap c0 = build_c0_map(sq);
    CHECK(c0.n_global() == 25);

    const MultiPatch two = two_squares(2, 1, 1);
    CHECK(build_c0_map(two).n_global() == 2 * 9 - 3);
    CHECK(build_identity_map(two).kind == CouplingKind::Uncoupled);
}

TEST_CASE("C0 merge count against coincident Greville points")
{
    for (int p : {2, 3})
    {
        const MultiPatch mp = refine_to(make_fig_domain(), p, p - 1, 1 + p % 2);
        std::vector<Eigen::Vector2d> pts;
        for (const Patch& patch : mp.patches)
        {
            const auto gu = greville_points(patch.basis.u), gv = greville_points(patch.basis.v);
            for (double v : gv)
                for (double u : gu)
                {
                    const Eigen::Vector2d x = eval_geometry(patch, u, v, 0).point();
                    bool found = false;
                    for (const auto& y : pts)
                        found = found || (x - y).norm() < 1e-10;
                    if (!found)
                        pts.push_back(x);
                }
        }
        CHECK(build_c0_map(mp).n_global() == static_cast<Index>(pts.size()));
    }
}

TEST_CASE("knot mismatch is rejected")
{
    MultiPatch two = two_squares(2, 1, 2);
    two.patches[1] = refine_patch(two.patches[1], TensorBasisSpec{two.patches[1].basis.u, BasisSpec1D::uniform(2, 4, 1)});
    CHECK_THROWS_AS(build_c0_map(two), CouplingError);
}

TEST_CASE("two unit squares: smooth dimension")
{
    const MultiPatch two = two_squares(2, 1, 2);
    const ExtractionMap c0 = build_c0_map(two);
    const SparseMatrix c = build_c1_constraints(two, c0);
    const ExtractionMap s = build_smooth_c1_map(c, c0);
    CHECK(s.kind == CouplingKind::SmoothC1);
    CHECK(s.n_global() == 6 * 4);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(c)};
    Index rank = 0;
    for (Index k = 0; k < svd.singularValues().size(); ++k)
        rank += svd.singularValues()(k) > 1e-10 * svd.singularValues()(0);
    CHECK(rank == 4);
}

TEST_CASE("constants and linears satisfy the C1 constraints")
{
    const MultiPatch mp = refine_to(make_fig_domain(), 3, 1, 2);
    const ExtractionMap c0 = build_c0_map(mp);
    const SparseMatrix c = build_c1_constraints(mp, c0);
    const double scale = Eigen::MatrixXd(c).cwiseAbs().maxCoeff();
    CHECK((c * interpolate_merged(mp, c0, [](double, double) { return 1.0; })).cwiseAbs().maxCoeff() < 1e-12 * scale);
    CHECK((c * interpolate_merged(mp, c0, [](double x, double) { return x; })).cwiseAbs().maxCoeff() < 1e-12 * scale);
    CHECK((c * interpolate_merged(mp, c0, [](double x, double y) { return 2 * x - 3 * y; })).cwiseAbs().maxCoeff() <
          1e-12 * scale);
}

TEST_CASE("six-patch smooth space: rank-nullity and C1 property")
{
    const MultiPatch mp = refine_to(make_fig_domain(), 3, 1, 2);
    const ExtractionMap c0 = build_c0_map(mp);
    const SparseMatrix c = build_c1_constraints(mp, c0);
    const ExtractionMap s = build_smooth_c1_map(c, c0);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(c)};
    Index rank = 0;
    for (Index k = 0; k < svd.singularValues().size(); ++k)
        rank += svd.singularValues()(k) > 1e-10 * svd.singularValues()(0);
    CHECK(s.n_global() == c0.n_global() - rank);
    MESSAGE("C0 dim " << c0.n_global() << ", smooth dim " << s.n_global());

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    std::normal_distribution<double> N(0, 1);
    for (int trial = 0; trial < 20; ++trial)
    {
        Eigen::VectorXd g(s.n_global());
        for (Index i = 0; i < g.size(); ++i)
            g(i) = N(rng);
        double gmax = 0.0;
        for (int k = 0; k < 6; ++k)
        {
            const Eigen::VectorXd ck = s.patch_coefficients(k, g).col(0);
            for (int q = 0; q < 25; ++q)
                gmax = std::max(gmax, gradient(mp.patches[k], ck, U(rng), U(rng)).norm());
        }
        double jump = 0.0;
        for (int q = 0; q < 100; ++q)
        {
            const Interface& itf = mp.interfaces[q % mp.interfaces.size()];
            const double t = U(rng);
            const auto ua = side_point(itf.side_a, t);
            const auto ub = side_point(itf.side_b, itf.reversed ? 1 - t : t);
            const Eigen::Vector2d ga = gradient(mp.patches[itf.patch_a], s.patch_coefficients(itf.patch_a, g).col(0), ua[0], ua[1]);
            const Eigen::Vector2d gb = gradient(mp.patches[itf.patch_b], s.patch_coefficients(itf.patch_b, g).col(0), ub[0], ub[1]);
            jump = std::max(jump, (ga - gb).norm());
        }
        CHECK(jump <= 1e-8 * gmax);
    }
}

TEST_CASE("quadratic polynomials lie in the smooth space")
{
    for (int p : {2, 3})
    {
        const MultiPatch mp = refine_to(make_fig_domain(), p, 1, 2);
        const ExtractionMap c0 = build_c0_map(mp);
        const ExtractionMap s = build_smooth_c1_map(build_c1_constraints(mp, c0), c0);
        const Eigen::MatrixXd z(s.reduce);
        for (auto f : {+[](double x, double y) { return x * x; }, +[](double x, double y) { return x * y; },
                       +[](double x, double y) { return y * y - x + 1; }})
        {
            const Eigen::VectorXd m = interpolate_merged(mp, c0, f);
            const Eigen::VectorXd g = z.colPivHouseholderQr().solve(m);
            CHECK((z * g - m).norm() <= 1e-10 * m.norm());
        }
    }
}

TEST_CASE("boundary value rows remove every boundary trace")
{
    const MultiPatch mp = refine_to(make_fig_domain(), 3, 1, 2);
    const ExtractionMap s = build_smooth_c1_map(mp, true);
    const ExtractionMap c0 = build_c0_map(mp);
    const SparseMatrix b = boundary_value_rows(mp, c0);
    CHECK((Eigen::MatrixXd(b * s.reduce)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.n_global() < build_smooth_c1_map(mp, false).n_global());
}

TEST_CASE("single patch smooth map is unchanged")
{
    const MultiPatch sq = refine_to(make_unit_square(), 3, 2, 4);
    CHECK(build_smooth_c1_map(sq).n_global() == 49);
}

TEST_CASE("constrain and vector maps")
{
    const MultiPatch sq = refine_to(make_unit_square(), 2, 1, 2);
    const ExtractionMap v = vector_map(build_c0_map(sq), 3);
    CHECK(v.n_global() == 3 * 16);
    SparseMatrix fix(2, 3 * 16);
    fix.insert(0, 0) = 1.0;
    fix.insert(1, 16 + 5) = 1.0;
    const ExtractionMap c = constrain(v, fix);
    CHECK(c.n_global() == 3 * 16 - 2);
    Eigen::VectorXd g = Eigen::VectorXd::Ones(c.n_global());
    const Eigen::MatrixXd loc = c.patch_coefficients(0, g);
    CHECK(loc.rows() == 16);
    CHECK(loc(0, 0) == 0.0);
    CHECK(loc(5, 1) == 0.0);
    CHECK(c.patch_block(0).rows() == 48);
}

TEST_CASE("requirement gate")
{
    const MultiPatch mp = make_fig_domain();
    auto find = [](const RequirementReport& r, const std::string& n) {
        for (const auto& m : r.methods)
            if (m.name == n)
                return m;
        FAIL("missing method");
        return MethodCheck{};
    };
    const RequirementReport r32 = check_requirements(mp, 3, 2);
    CHECK_FALSE(find(r32, "AS-G1").passed);
    CHECK(find(r32, "Approx-C1").passed);
    CHECK(find(r32, "D-Patch").passed);
    CHECK(r32.interior_ev == 2);
    const RequirementReport r31 = check_requirements(mp, 3, 1);
    CHECK(find(r31, "AS-G1").passed);
    const RequirementReport r21 = check_requirements(mp, 2, 1);
    CHECK(find(r21, "Almost-C1").passed);
    CHECK_FALSE(find(r21, "AS-G1").passed);
    CHECK_FALSE(find(r21, "Approx-C1").passed);
    CHECK_FALSE(check_requirements(mp, 2, 0).any_passed());
    CHECK_FALSE(check_requirements(mp, 1, 0).any_passed());

    // a boundary vertex shared by four patches: valence 4 boundary EV
    std::vector<Patch> fan;
    const double pi = std::acos(-1.0);
    for (int k = 0; k < 4; ++k)
    {
        auto ray = [&](double a, double r) { return Eigen::VectorXd(Eigen::Vector2d(r * std::cos(a), r * std::sin(a))); };
        const double a0 = k * pi / 4, a1 = (k + 1) * pi / 4, am = 0.5 * (a0 + a1);
        fan.push_back(make_bilinear_patch({ray(0, 0), ray(a0, 1), ray(a1, 1), ray(am, 1.5)}));
    }
    const RequirementReport rb = check_requirements(detect_topology(fan), 3, 1);
    CHECK(rb.max_boundary_ev_valence == 4);
    CHECK_FALSE(find(rb, "D-Patch").passed);
}
