#include <doctest.h>

#include "mpiga/shell.hpp"
#include "mpiga/linalg.hpp"

#include <random>
#include <sstream>

using namespace mpiga;

namespace {

/// Unit square lifted to z = 0 in three dimensions.
MultiPatch flat_plate(int p, int r, int n)
{
    const MultiPatch sq = refine_to(make_unit_square(), p, r, n);
    std::vector<Patch> ps;
    for (const Patch& q : sq.patches)
    {
        Patch s{q.basis, Eigen::MatrixXd::Zero(q.basis.size(), 3)};
        s.control_points.leftCols(2) = q.control_points;
        ps.push_back(std::move(s));
    }
    return detect_topology(std::move(ps));
}

MultiPatch paraboloid(ParaboloidKind kind, int p, int r, int n)
{
    const MultiPatch base = transform_planar(make_fig_domain(), 1.0, Eigen::Vector2d(-0.5, -0.5));
    return refine_to(make_paraboloid(kind, base, 2), p, r, n);
}

/// Spline coefficients interpolating f(u) at the Greville points.
template <class F>
Eigen::VectorXd interpolate_1d(const BasisSpec1D& spec, F f)
{
    const auto g = greville_points(spec);
    Eigen::VectorXd rhs(static_cast<Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i)
        rhs(static_cast<Index>(i)) = f(g[i]);
    return collocation_matrix(spec, g).partialPivLu().solve(rhs);
}

/// Merged vector field with component `comp` equal to f(x) on the flat plate.
template <class F>
Eigen::VectorXd field_in_x(const MultiPatch& mp, const ExtractionMap& map, int comp, F f)
{
    const Patch& p = mp.patches[0];
    const Eigen::VectorXd a = interpolate_1d(p.basis.u, f);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(3 * map.n_merged);
    for (Index j = 0; j < p.basis.v.size(); ++j)
        for (Index i = 0; i < p.basis.u.size(); ++i)
            m(comp * map.n_merged + map.merged_index(0, p.basis.index(i, j))) = a(i);
    return m;
}

} // namespace

TEST_CASE("plane stress matrix on the identity metric")
{
    const double E = 3.0, nu = 0.25;
    const Eigen::Matrix3d D = plane_stress_matrix(Eigen::Matrix2d::Identity(), E, nu);
    Eigen::Matrix3d ref;
    ref << 1, nu, 0, nu, 1, 0, 0, 0, (1 - nu) / 2;
    ref *= E / (1 - nu * nu);
    CHECK((D - ref).norm() < 1e-14);
}

TEST_CASE("material validation")
{
    ShellMaterial m;
    CHECK_NOTHROW(m.validate());
    m.nu = 0.5;
    CHECK_THROWS_AS(m.validate(), ShellError);
    m = ShellMaterial{};
    m.t = 0.0;
    CHECK_THROWS_AS(m.validate(), ShellError);
}

TEST_CASE("flat plate bending energy of w = x^2")
{
    const ShellMaterial mat;
    for (int n : {1, 4})
    {
        const MultiPatch mp = flat_plate(2, 1, n);
        const ExtractionMap map = vector_map(build_identity_map(mp), 3);
        const SparseMatrix K = assemble_kl_stiffness(mp, map, mat);
        const Eigen::VectorXd w = field_in_x(mp, map, 2, [](double x) { return x * x; });
        // kappa_11 = 2 everywhere: W = 1/2 D 4 with D = E t^3 / (12 (1 - nu^2)).
        const double D = mat.E * std::pow(mat.t, 3) / (12.0 * (1.0 - mat.nu * mat.nu));
        CHECK(bending_energy(w, K) == doctest::Approx(2.0 * D).epsilon(1e-10));
    }
}

TEST_CASE("uniaxial stretch: membrane energy and von Mises stress")
{
    const ShellMaterial mat;
    const double eps = 1e-3;
    const MultiPatch mp = flat_plate(3, 2, 3);
    const ExtractionMap map = vector_map(build_identity_map(mp), 3);
    const Eigen::VectorXd u = field_in_x(mp, map, 0, [&](double x) { return eps * x; });
    const double s = mat.E * eps / (1.0 - mat.nu * mat.nu);
    CHECK(bending_energy(u, assemble_kl_stiffness(mp, map, mat)) ==
          doctest::Approx(0.5 * mat.t * s * eps).epsilon(1e-10));
    const double vm = s * std::sqrt(1.0 - mat.nu + mat.nu * mat.nu);
    for (double uu : {0.1, 0.5, 0.93})
        CHECK(von_mises_at(mp, map, u, mat, 0, uu, 0.37) == doctest::Approx(vm).epsilon(1e-10));
}

TEST_CASE("thickness scaling of membrane and bending energy")
{
    ShellMaterial thin, thick;
    thick.t = 2.0 * thin.t;
    const MultiPatch mp = flat_plate(2, 1, 2);
    const ExtractionMap map = vector_map(build_identity_map(mp), 3);
    const Eigen::VectorXd w = field_in_x(mp, map, 2, [](double x) { return x * x; });
    const Eigen::VectorXd u = field_in_x(mp, map, 0, [](double x) { return x; });
    const SparseMatrix k1 = assemble_kl_stiffness(mp, map, thin), k2 = assemble_kl_stiffness(mp, map, thick);
    CHECK(bending_energy(w, k2) / bending_energy(w, k1) == doctest::Approx(8.0).epsilon(1e-10));
    CHECK(bending_energy(u, k2) / bending_energy(u, k1) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("rigid body modes carry no energy")
{
    const ShellMaterial mat;
    for (ParaboloidKind kind : {ParaboloidKind::Elliptic, ParaboloidKind::Hyperbolic})
    {
        const MultiPatch mp = paraboloid(kind, 3, 1, 3);
        const ExtractionMap map = vector_map(build_c0_map(mp), 3);
        const SparseMatrix K = assemble_kl_stiffness(mp, map, mat);
        std::mt19937 rng(3);
        std::normal_distribution<double> g;
        Eigen::VectorXd x(K.rows());
        for (Index i = 0; i < x.size(); ++i)
            x(i) = g(rng);
        x.normalize();
        const double ref = bending_energy(x, K);
        const Eigen::MatrixXd R = rigid_body_modes(mp, map);
        REQUIRE(R.cols() == 6);
        for (Index j = 0; j < 6; ++j)
            CHECK(bending_energy(R.col(j).normalized(), K) < 1e-10 * ref);
    }
}

TEST_CASE("penalty coupling vanishes on continuous rigid motions")
{
    const ShellMaterial mat;
    const MultiPatch mp = paraboloid(ParaboloidKind::Elliptic, 2, 1, 2);
    const ExtractionMap map = vector_map(build_identity_map(mp), 3);
    const SparseMatrix P = penalty_shell_coupling(mp, map, 10.0, mat);
    const Eigen::MatrixXd R = rigid_body_modes(mp, map);
    CHECK((P * R).norm() < 1e-8 * P.norm() * R.norm());
    CHECK(P.norm() > 0.0);
}

TEST_CASE("load resultants")
{
    const MultiPatch mp = flat_plate(2, 1, 3);
    const ExtractionMap map = vector_map(build_identity_map(mp), 3);
    const Index n = map.n_merged;
    const Eigen::VectorXd fd = assemble_shell_load(mp, map, LoadSpec::distributed(Eigen::Vector3d(1, -2, 3)));
    CHECK(fd.segment(0, n).sum() == doctest::Approx(1.0));
    CHECK(fd.segment(n, n).sum() == doctest::Approx(-2.0));
    CHECK(fd.segment(2 * n, n).sum() == doctest::Approx(3.0));

    const Eigen::VectorXd fp =
        assemble_shell_load(mp, map, LoadSpec::point(Eigen::Vector3d(0.3, 0.6, 0), Eigen::Vector3d(0, 0, -5)));
    CHECK(fp.segment(2 * n, n).sum() == doctest::Approx(-5.0));
    // A corner load sits on the corner function alone.
    const Eigen::VectorXd fc =
        assemble_shell_load(mp, map, LoadSpec::point(Eigen::Vector3d(1, 1, 0), Eigen::Vector3d(0, 0, 1)));
    CHECK(fc.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    CHECK(fc.sum() == doctest::Approx(1.0));

    CHECK_THROWS_AS(
        assemble_shell_load(mp, map, LoadSpec::point(Eigen::Vector3d(3, 0, 0), Eigen::Vector3d(0, 0, 1))),
        ShellError);
}

TEST_CASE("boundary conditions must remove every rigid motion")
{
    const MultiPatch mp = paraboloid(ParaboloidKind::Elliptic, 2, 1, 2);
    const ExtractionMap map = vector_map(build_c0_map(mp), 3);
    CHECK_THROWS_AS(apply_strong_shell_bcs(mp, map, elliptic_shell_bcs(mp, false)), ShellError);
    CHECK_NOTHROW(apply_strong_shell_bcs(mp, map, elliptic_shell_bcs(mp, true)));
    CHECK_THROWS_AS(apply_strong_shell_bcs(mp, map, {}), ShellError);
}

TEST_CASE("clamped hyperbolic paraboloid: positive definite, quadratic in the load")
{
    const ShellMaterial mat;
    const MultiPatch mp = paraboloid(ParaboloidKind::Hyperbolic, 3, 1, 2);
    const ExtractionMap map = vector_map(build_c0_map(mp), 3);
    const SparseMatrix K = assemble_kl_stiffness(mp, map, mat);
    const auto bcs = hyperbolic_shell_bcs(mp);
    REQUIRE(!bcs.empty());
    const Eigen::VectorXd f = assemble_shell_load(mp, map, LoadSpec::distributed(Eigen::Vector3d(0, 0, -80)));

    const ShellSolution s1 = solve_shell(apply_shell_bcs(K, f, mp, map, bcs, mat));
    const ShellSolution s2 = solve_shell(apply_shell_bcs(K, 2.0 * f, mp, map, bcs, mat));
    CHECK(s1.energy > 0.0);
    CHECK(s2.energy == doctest::Approx(4.0 * s1.energy).epsilon(1e-10));
    // Clamped sides stay fixed.
    const Eigen::VectorXd merged = s1.system.map.merged(s1.coeffs);
    const ExtractionMap& cm = s1.system.map;
    for (const ShellBC& bc : bcs)
        for (Index i : mp.patches[bc.patch].side_indices(static_cast<Side>(bc.index)))
            for (int c = 0; c < 3; ++c)
                CHECK(std::abs(merged(c * cm.n_merged + cm.merged_index(bc.patch, i))) < 1e-14);

    const ShellSolution s0 = solve_shell(apply_shell_bcs(K, 0.0 * f, mp, map, bcs, mat));
    CHECK(s0.energy == 0.0);
    for (const StressSample& smp : von_mises_membrane(mp, s0.system.map, s0.coeffs, mat, 4))
        CHECK(smp.vm == 0.0);
}

TEST_CASE("stress sampling layout and exports")
{
    const ShellMaterial mat;
    const MultiPatch mp = flat_plate(2, 1, 2);
    const ExtractionMap map = vector_map(build_identity_map(mp), 3);
    const Eigen::VectorXd u = field_in_x(mp, map, 0, [](double x) { return 1e-2 * x * x; });
    const auto samples = von_mises_membrane(mp, map, u, mat, 4);
    REQUIRE(samples.size() == 25);
    CHECK(samples[1].u == doctest::Approx(0.25));
    CHECK(samples[5].v == doctest::Approx(0.25));

    std::ostringstream csv, vtk, iso;
    write_stress_csv(csv, samples);
    CHECK(csv.str().rfind("patch,u,v,x,y,z,von_mises\n", 0) == 0);
    write_stress_vtk(vtk, samples, 0, 4);
    CHECK(vtk.str().find("STRUCTURED_GRID") != std::string::npos);
    CHECK(vtk.str().find("DIMENSIONS 5 5 1") != std::string::npos);
    // sigma_VM grows linearly in x from 0 to about 2.6e3: one iso-line per level crossed.
    write_stress_contours(iso, samples, 4, {1e3, 2e3, 1e7});
    const std::string s = iso.str();
    CHECK(s.rfind("level,patch,x0,y0,z0,x1,y1,z1\n", 0) == 0);
    CHECK(s.find("\n1000,") != std::string::npos);
    CHECK(s.find("\n2000,") != std::string::npos);
    CHECK(s.find("\n10000000,") == std::string::npos);
}

TEST_CASE("interface stress jump of a continuous field")
{
    const ShellMaterial mat;
    const MultiPatch mp = paraboloid(ParaboloidKind::Elliptic, 2, 1, 2);
    const ExtractionMap map = vector_map(build_c0_map(mp), 3);
    const Eigen::MatrixXd R = rigid_body_modes(mp, map);
    const Eigen::VectorXd c = R.col(0) + R.col(4);
    const InterfaceJump j = interface_stress_jump(mp, map, c, mat, 60);
    CHECK(j.samples == 60);
    CHECK(j.per_interface.size() == mp.interfaces.size());
    CHECK(j.max_jump < 1e-6);
    CHECK(interface_displacement_jump(mp, map, c) < 1e-12);
}
