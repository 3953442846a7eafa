#include <doctest.h>

#include "mpiga/multipatch.hpp"

#include <algorithm>
#include <sstream>

using namespace mpiga;

TEST_CASE("unit square topology")
{
    const MultiPatch mp = make_unit_square();
    CHECK(mp.interfaces.empty());
    CHECK(mp.boundaries.size() == 4);
    CHECK(mp.vertices.size() == 4);
    CHECK(mp.count_interior_ev() == 0);
    CHECK(mp.count_boundary_ev() == 0);
    const Eigen::VectorXd x = eval_geometry(mp.patches[0], 0.5, 0.5, 0).point();
    CHECK(x(0) == doctest::Approx(0.5));
    CHECK(x(1) == doctest::Approx(0.5));
}

TEST_CASE("six-patch domain topology")
{
    const MultiPatch mp = make_fig_domain();
    CHECK(mp.num_patches() == 6);
    CHECK(mp.interfaces.size() == 7);
    CHECK(mp.boundaries.size() == 6 * 4 - 2 * 7);
    CHECK(mp.vertices.size() == 12);
    CHECK(mp.count_interior_ev() == 2);
    CHECK(mp.count_boundary_ev() == 0);
    std::vector<int> ev;
    for (const Vertex& v : mp.vertices)
        if (v.extraordinary())
            ev.push_back(v.valence);
    std::sort(ev.begin(), ev.end());
    CHECK(ev == std::vector<int>{3, 5});
    for (const Interface& i : mp.interfaces)
        CHECK(interface_gap(mp, i) < 1e-14);
    // positive orientation everywhere
    for (const Patch& p : mp.patches)
        CHECK(eval_geometry(p, 0.5, 0.5, 1).jacobian().determinant() > 0.0);
}

TEST_CASE("refinement keeps geometry and topology")
{
    const MultiPatch mp = make_fig_domain();
    const MultiPatch rf = refine_to(mp, 3, 1, 4);
    CHECK(rf.interfaces.size() == mp.interfaces.size());
    for (std::size_t k = 0; k < mp.patches.size(); ++k)
    {
        CHECK(rf.patches[k].basis.u.degree() == 3);
        CHECK(rf.patches[k].basis.u.numElements() == 4);
        for (double u : {0.1, 0.55, 0.9})
            for (double v : {0.2, 0.7})
                CHECK((eval_geometry(rf.patches[k], u, v, 0).point() - eval_geometry(mp.patches[k], u, v, 0).point())
                          .norm() < 1e-13);
    }
    CHECK_THROWS_AS(refine_to(mp, 2, 2, 2), GeometryError);
}

TEST_CASE("paraboloid lifts reproduce the closed forms")
{
    const MultiPatch base = transform_planar(make_fig_domain(), 1.0, Eigen::Vector2d(-0.5, -0.5));
    for (auto kind : {ParaboloidKind::Elliptic, ParaboloidKind::Hyperbolic})
    {
        const MultiPatch s = make_paraboloid(kind, base, 2);
        CHECK(s.dim() == 3);
        CHECK(s.interfaces.size() == 7);
        for (const Patch& p : s.patches)
            for (double u : {0.0, 0.3, 0.8})
                for (double v : {0.15, 1.0})
                {
                    const Eigen::VectorXd x = eval_geometry(p, u, v, 0).point();
                    CHECK(x(2) == doctest::Approx(paraboloid_height(kind, x(0), x(1))).epsilon(1e-12));
                }
    }
}

TEST_CASE("surface curvature at the paraboloid centre")
{
    const MultiPatch sq = transform_planar(make_unit_square(), 1.0, Eigen::Vector2d(-0.5, -0.5));
    const MultiPatch h = make_paraboloid(ParaboloidKind::Hyperbolic, sq, 2);
    const SurfaceFrame fh = surface_frame(h.patches[0], 0.5, 0.5);
    CHECK(fh.curvature(0, 0) == doctest::Approx(2.0));
    CHECK(fh.curvature(1, 1) == doctest::Approx(-2.0));
    CHECK(std::abs(fh.curvature(0, 1)) < 1e-12);
    const MultiPatch e = make_paraboloid(ParaboloidKind::Elliptic, sq, 3);
    const SurfaceFrame fe = surface_frame(e.patches[0], 0.5, 0.5);
    CHECK(fe.curvature(0, 0) == doctest::Approx(-4.0));
    CHECK(fe.curvature(1, 1) == doctest::Approx(-4.0));
    CHECK(eval_geometry(e.patches[0], 0.5, 0.5, 0).point()(2) == doctest::Approx(1.0));
}

TEST_CASE("point inversion")
{
    const MultiPatch base = transform_planar(make_fig_domain(), 1.0, Eigen::Vector2d(-0.5, -0.5));
    const MultiPatch s = make_paraboloid(ParaboloidKind::Elliptic, base, 3);
    const Eigen::Vector3d apex(0, 0, 1);
    std::array<double, 2> uv{};
    REQUIRE(invert_point(s.patches[4], apex, uv));
    CHECK((eval_geometry(s.patches[4], uv[0], uv[1], 0).point() - Eigen::VectorXd(apex)).norm() < 1e-10);
    CHECK_FALSE(invert_point(s.patches[0], apex, uv));
}

TEST_CASE("mpatch round trip is exact")
{
    const MultiPatch mp = refine_to(make_fig_domain(), 3, 2, 3);
    std::stringstream ss;
    write_mpatch(ss, mp);
    const MultiPatch back = read_mpatch(ss);
    REQUIRE(back.num_patches() == mp.num_patches());
    for (std::size_t k = 0; k < mp.patches.size(); ++k)
    {
        CHECK(back.patches[k].basis == mp.patches[k].basis);
        CHECK(back.patches[k].control_points == mp.patches[k].control_points);
    }
    CHECK(back.interfaces.size() == mp.interfaces.size());
    CHECK(back.boundaries.size() == mp.boundaries.size());

    std::stringstream bad("mpatch v1 2 1\npatch 0\nknots 1 4 0 0 1 1\nknots 1 4 0 0 1 1\ngrid 3 2\n");
    CHECK_THROWS_AS(read_mpatch(bad), GeometryError);
}

TEST_CASE("non-manifold input is rejected")
{
    const MultiPatch sq = make_unit_square();
    std::vector<Patch> three{sq.patches[0], sq.patches[0], sq.patches[0]};
    CHECK_THROWS_AS(detect_topology(three), GeometryError);
}
