/** @file shell.cpp

    @brief Kirchhoff-Love shell assembly, constraints and stress recovery.
*/

#include "mpiga/shell.hpp"
#include "mpiga/quadrature.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace mpiga {

void ShellMaterial::validate() const
{
    if (!(E > 0.0) || !(t > 0.0) || nu < 0.0 || nu >= 0.5 || rho < 0.0)
        throw ShellError("invalid shell material");
}

Eigen::Matrix3d plane_stress_matrix(const Eigen::Matrix2d& a, double E, double nu)
{
    const Eigen::Matrix2d ai = a.inverse();
    auto C = [&](int i, int j, int k, int l) {
        return E / (1.0 - nu * nu) *
               (nu * ai(i, j) * ai(k, l) + 0.5 * (1.0 - nu) * (ai(i, k) * ai(j, l) + ai(i, l) * ai(j, k)));
    };
    // Voigt pairs 11, 22, 12
    static constexpr int I[3] = {0, 1, 0}, J[3] = {0, 1, 1};
    Eigen::Matrix3d D;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            D(r, c) = C(I[r], J[r], I[c], J[c]);
    return D;
}

LoadSpec LoadSpec::distributed(const Eigen::Vector3d& q)
{
    LoadSpec l;
    l.kind = Kind::Distributed;
    l.force = q;
    return l;
}

LoadSpec LoadSpec::point(const Eigen::Vector3d& target, const Eigen::Vector3d& force, int patch)
{
    LoadSpec l;
    l.kind = Kind::Point;
    l.force = force;
    l.target = target;
    l.patch = patch;
    return l;
}

ShellBC ShellBC::fixed_all(int patch, Side s)
{
    ShellBC bc;
    bc.where = Where::Side;
    bc.patch = patch;
    bc.index = static_cast<int>(s);
    return bc;
}

ShellBC ShellBC::clamped_side(int patch, Side s)
{
    ShellBC bc = fixed_all(patch, s);
    bc.clamped = true;
    return bc;
}

ShellBC ShellBC::fixed_corner(int patch, int corner, std::array<bool, 3> components)
{
    ShellBC bc;
    bc.where = Where::Corner;
    bc.patch = patch;
    bc.index = corner;
    bc.fixed = components;
    return bc;
}

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& a)
{
    Eigen::Matrix3d s;
    s << 0, -a(2), a(1), a(2), 0, -a(0), -a(1), a(0), 0;
    return s;
}

/// Basis functions and surface frame at one parametric point.
struct ShellPoint
{
    std::vector<Index> idx; ///< patch-local
    Eigen::MatrixXd N;      ///< 6 x nf parametric derivatives
    SurfaceFrame frame;
    Eigen::Vector3d x;
};

ShellPoint shell_point(const Patch& p, double u, double v)
{
    if (p.dim() != 3)
        throw ShellError("shell analysis needs a 3D surface patch");
    const TensorBasisEval e = eval_tensor_basis(p.basis, u, v, 2);
    Eigen::MatrixXd cp(e.indices.size(), 3);
    for (std::size_t k = 0; k < e.indices.size(); ++k)
        cp.row(static_cast<Index>(k)) = p.control_points.row(e.indices[k]);
    GeometryEval g;
    g.derivs = (e.values * cp).transpose();
    ShellPoint sp;
    sp.idx = e.indices;
    sp.N = e.values;
    try
    {
        sp.frame = surface_frame(g);
    }
    catch (const GeometryError&)
    {
        throw ShellError("degenerate surface frame");
    }
    sp.x = g.derivs.col(0);
    return sp;
}

/// Linearized normal variation, 3 x 3nf, component-major columns.
Eigen::MatrixXd normal_variation(const ShellPoint& sp)
{
    const SurfaceFrame& f = sp.frame;
    const Index nf = sp.N.cols();
    const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - f.a3 * f.a3.transpose();
    const Eigen::Matrix3d A = -P * skew(f.a2) / f.jac_det; // times N_,1
    const Eigen::Matrix3d B = P * skew(f.a1) / f.jac_det;  // times N_,2
    Eigen::MatrixXd da3(3, 3 * nf);
    for (int c = 0; c < 3; ++c)
        for (Index i = 0; i < nf; ++i)
            da3.col(c * nf + i) = sp.N(1, i) * A.col(c) + sp.N(2, i) * B.col(c);
    return da3;
}

Eigen::MatrixXd membrane_operator(const ShellPoint& sp)
{
    const SurfaceFrame& f = sp.frame;
    const Index nf = sp.N.cols();
    Eigen::MatrixXd Bm(3, 3 * nf);
    for (int c = 0; c < 3; ++c)
        for (Index i = 0; i < nf; ++i)
        {
            const double n1 = sp.N(1, i), n2 = sp.N(2, i);
            Bm(0, c * nf + i) = n1 * f.a1(c);
            Bm(1, c * nf + i) = n2 * f.a2(c);
            Bm(2, c * nf + i) = n1 * f.a2(c) + n2 * f.a1(c);
        }
    return Bm;
}

Eigen::MatrixXd bending_operator(const ShellPoint& sp, const Eigen::MatrixXd& da3)
{
    const SurfaceFrame& f = sp.frame;
    const Index nf = sp.N.cols();
    Eigen::MatrixXd Bb(3, 3 * nf);
    Bb.row(0) = -(f.d11.transpose() * da3);
    Bb.row(1) = -(f.d22.transpose() * da3);
    Bb.row(2) = -2.0 * (f.d12.transpose() * da3);
    for (int c = 0; c < 3; ++c)
        for (Index i = 0; i < nf; ++i)
        {
            Bb(0, c * nf + i) -= sp.N(deriv_slot(2, 0), i) * f.a3(c);
            Bb(1, c * nf + i) -= sp.N(deriv_slot(0, 2), i) * f.a3(c);
            Bb(2, c * nf + i) -= 2.0 * sp.N(deriv_slot(1, 1), i) * f.a3(c);
        }
    return Bb;
}

void check_vector(const ExtractionMap& map)
{
    if (map.components != 3)
        throw CouplingError("shell problem needs a 3-component extraction map");
}

/// Merged rows of the 3nf local columns (component-major).
std::vector<Index> merged_rows(const ExtractionMap& map, int patch, const std::vector<Index>& local)
{
    const Index nf = static_cast<Index>(local.size());
    std::vector<Index> out(3 * nf);
    for (int c = 0; c < 3; ++c)
        for (Index i = 0; i < nf; ++i)
            out[c * nf + i] = c * map.n_merged + map.merged_index(patch, local[i]);
    return out;
}

Eigen::MatrixXd value_operator(const ShellPoint& sp)
{
    const Index nf = sp.N.cols();
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3 * nf);
    for (int c = 0; c < 3; ++c)
        V.row(c).segment(c * nf, nf) = sp.N.row(0);
    return V;
}

template <class Fn>
void for_each_element(const Patch& p, Fn fn)
{
    const auto bu = p.basis.u.breaks(), bv = p.basis.v.breaks();
    for (std::size_t j = 0; j + 1 < bv.size(); ++j)
        for (std::size_t i = 0; i + 1 < bu.size(); ++i)
            fn(bu[i], bu[i + 1], bv[j], bv[j + 1]);
}

std::array<double, 4> side_element(const Patch& p, Side s, double t0, double t1)
{
    const auto bu = p.basis.u.breaks(), bv = p.basis.v.breaks();
    switch (s)
    {
    case Side::West: return {bu[0], bu[1], t0, t1};
    case Side::East: return {bu[bu.size() - 2], bu.back(), t0, t1};
    case Side::South: return {t0, t1, bv[0], bv[1]};
    case Side::North: return {t0, t1, bv[bv.size() - 2], bv.back()};
    }
    return {0, 1, 0, 1};
}

int degree(const Patch& p) { return std::max(p.basis.u.degree(), p.basis.v.degree()); }

/// In-surface unit conormal of a side (sign immaterial for the quadratic forms).
Eigen::Vector3d conormal(const ShellPoint& sp, Side s)
{
    const Eigen::Vector3d tau = side_direction(s) == 0 ? sp.frame.a1 : sp.frame.a2;
    return tau.cross(sp.frame.a3).normalized();
}

double side_speed(const ShellPoint& sp, Side s)
{
    return (side_direction(s) == 0 ? sp.frame.a1 : sp.frame.a2).norm();
}

/// Merged displacement coefficients of one patch, n_local x 3.
Eigen::MatrixXd local_displacements(const ExtractionMap& map, const Eigen::VectorXd& merged, int patch)
{
    const Index n = map.n_local(patch);
    Eigen::MatrixXd c(n, 3);
    for (Index l = 0; l < n; ++l)
        for (int k = 0; k < 3; ++k)
            c(l, k) = merged(k * map.n_merged + map.merged_index(patch, l));
    return c;
}

double von_mises_local(const ShellPoint& sp, const Eigen::MatrixXd& disp, const ShellMaterial& mat)
{
    const SurfaceFrame& f = sp.frame;
    Eigen::Vector3d u1 = Eigen::Vector3d::Zero(), u2 = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < sp.idx.size(); ++k)
    {
        const Eigen::Vector3d c = disp.row(sp.idx[k]).transpose();
        u1 += sp.N(1, static_cast<Index>(k)) * c;
        u2 += sp.N(2, static_cast<Index>(k)) * c;
    }
    const Eigen::Vector3d eps(u1.dot(f.a1), u2.dot(f.a2), u1.dot(f.a2) + u2.dot(f.a1));
    const Eigen::Vector3d s = plane_stress_matrix(f.metric, mat.E, mat.nu) * eps;
    Eigen::Matrix2d S;
    S << s(0), s(2), s(2), s(1);
    const Eigen::Vector3d e1 = f.a1.normalized();
    const Eigen::Vector3d e2 = f.a3.cross(e1);
    Eigen::Matrix2d T;
    T << f.a1.dot(e1), f.a2.dot(e1), f.a1.dot(e2), f.a2.dot(e2);
    const Eigen::Matrix2d L = T * S * T.transpose();
    return std::sqrt(std::max(0.0, L(0, 0) * L(0, 0) - L(0, 0) * L(1, 1) + L(1, 1) * L(1, 1) + 3.0 * L(0, 1) * L(0, 1)));
}

Eigen::Vector3d displacement_local(const ShellPoint& sp, const Eigen::MatrixXd& disp)
{
    Eigen::Vector3d u = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < sp.idx.size(); ++k)
        u += sp.N(0, static_cast<Index>(k)) * disp.row(sp.idx[k]).transpose();
    return u;
}

/// Calls fn(sp_a, sp_b, side_a, weight, h) at Gauss points of every interface.
template <class Fn>
void for_each_interface_point(const MultiPatch& mp, Fn fn)
{
    for (const Interface& itf : mp.interfaces)
    {
        const Patch& pa = mp.patches[itf.patch_a];
        const Patch& pb = mp.patches[itf.patch_b];
        const std::vector<double> br = pa.side_basis(itf.side_a).breaks();
        const GaussRule& g = gauss_rule(degree(pa) + 2);
        for (std::size_t e = 0; e + 1 < br.size(); ++e)
        {
            const double t0 = br[e], t1 = br[e + 1];
            const auto ea = side_element(pa, itf.side_a, t0, t1);
            const auto eb = itf.reversed ? side_element(pb, itf.side_b, 1.0 - t1, 1.0 - t0)
                                         : side_element(pb, itf.side_b, t0, t1);
            const double h = 0.5 * (element_size(pa, ea[0], ea[1], ea[2], ea[3]) +
                                    element_size(pb, eb[0], eb[1], eb[2], eb[3]));
            for (std::size_t q = 0; q < g.points.size(); ++q)
            {
                const double t = t0 + (t1 - t0) * g.points[q];
                const auto uva = side_point(itf.side_a, t);
                const auto uvb = side_point(itf.side_b, itf.reversed ? 1.0 - t : t);
                const ShellPoint a = shell_point(pa, uva[0], uva[1]);
                const ShellPoint b = shell_point(pb, uvb[0], uvb[1]);
                fn(itf, a, b, (t1 - t0) * g.weights[q] * side_speed(a, itf.side_a), h);
            }
        }
    }
}

std::vector<Index> concat(const std::vector<Index>& a, const std::vector<Index>& b)
{
    std::vector<Index> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

/// [a, -b] as one row block.
Eigen::MatrixXd jump(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, -b;
    return out;
}

} // namespace

SparseMatrix assemble_kl_stiffness(const MultiPatch& mp, const ExtractionMap& map, const ShellMaterial& mat)
{
    check_vector(map);
    mat.validate();
    const Index n = 3 * map.n_merged;
    TripletAccumulator acc(n, n);
    const double tb = mat.t * mat.t * mat.t / 12.0;
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Patch& p = mp.patches[k];
        const int nq = degree(p) + 1;
        for_each_element(p, [&](double u0, double u1, double v0, double v1) {
            const ElementQuad eq = element_quadrature(u0, u1, v0, v1, nq);
            Eigen::MatrixXd ke;
            std::vector<Index> rows;
            for (std::size_t q = 0; q < eq.uv.size(); ++q)
            {
                const ShellPoint sp = shell_point(p, eq.uv[q][0], eq.uv[q][1]);
                const Eigen::MatrixXd da3 = normal_variation(sp);
                const Eigen::MatrixXd Bm = membrane_operator(sp);
                const Eigen::MatrixXd Bb = bending_operator(sp, da3);
                const Eigen::Matrix3d D = plane_stress_matrix(sp.frame.metric, mat.E, mat.nu);
                const double w = eq.w[q] * sp.frame.jac_det;
                if (q == 0)
                {
                    rows = merged_rows(map, k, sp.idx);
                    ke = Eigen::MatrixXd::Zero(Bm.cols(), Bm.cols());
                }
                ke.noalias() += Bm.transpose() * ((w * mat.t) * D) * Bm;
                ke.noalias() += Bb.transpose() * ((w * tb) * D) * Bb;
            }
            acc.add_block(rows, rows, ke);
        });
    }
    return acc.finish();
}

Eigen::VectorXd assemble_shell_load(const MultiPatch& mp, const ExtractionMap& map, const LoadSpec& load)
{
    check_vector(map);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * map.n_merged);
    if (load.kind == LoadSpec::Kind::Point)
    {
        std::vector<int> order;
        if (load.patch >= 0 && load.patch < static_cast<int>(mp.patches.size()))
            order.push_back(load.patch);
        for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
            if (k != load.patch)
                order.push_back(k);
        for (int k : order)
        {
            std::array<double, 2> uv{};
            if (!invert_point(mp.patches[k], load.target, uv, 1e-10))
                continue;
            const ShellPoint sp = shell_point(mp.patches[k], uv[0], uv[1]);
            const std::vector<Index> rows = merged_rows(map, k, sp.idx);
            const Eigen::VectorXd fe = value_operator(sp).transpose() * load.force;
            for (std::size_t i = 0; i < rows.size(); ++i)
                f(rows[i]) += fe(static_cast<Index>(i));
            return f;
        }
        throw ShellError("point load target not found on any patch");
    }
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Patch& p = mp.patches[k];
        const int nq = degree(p) + 1;
        for_each_element(p, [&](double u0, double u1, double v0, double v1) {
            const ElementQuad eq = element_quadrature(u0, u1, v0, v1, nq);
            for (std::size_t q = 0; q < eq.uv.size(); ++q)
            {
                const ShellPoint sp = shell_point(p, eq.uv[q][0], eq.uv[q][1]);
                const std::vector<Index> rows = merged_rows(map, k, sp.idx);
                const Eigen::VectorXd fe =
                    (eq.w[q] * sp.frame.jac_det) * (value_operator(sp).transpose() * load.force);
                for (std::size_t i = 0; i < rows.size(); ++i)
                    f(rows[i]) += fe(static_cast<Index>(i));
            }
        });
    }
    return f;
}

SparseMatrix penalty_shell_coupling(const MultiPatch& mp, const ExtractionMap& map, double alpha,
                                    const ShellMaterial& mat)
{
    check_vector(map);
    mat.validate();
    if (!(alpha > 0.0))
        throw std::invalid_argument("penalty parameter must be positive");
    const Index n = 3 * map.n_merged;
    TripletAccumulator acc(n, n);
    const double cu = alpha * mat.E * mat.t, cr = alpha * mat.bending_stiffness();
    for_each_interface_point(mp, [&](const Interface& itf, const ShellPoint& a, const ShellPoint& b, double w,
                                     double h) {
        const std::vector<Index> rows =
            concat(merged_rows(map, itf.patch_a, a.idx), merged_rows(map, itf.patch_b, b.idx));
        const Eigen::MatrixXd ju = jump(value_operator(a), value_operator(b));
        const Eigen::Vector3d d = conormal(a, itf.side_a);
        const Eigen::MatrixXd jr = jump(d.transpose() * normal_variation(a), d.transpose() * normal_variation(b));
        const Eigen::MatrixXd m = (w * cu / h) * ju.transpose() * ju + (w * cr / h) * jr.transpose() * jr;
        acc.add_block(rows, rows, m);
    });
    return acc.finish();
}

SparseMatrix clamp_rotation_terms(const MultiPatch& mp, const ExtractionMap& map, const std::vector<ShellBC>& bcs,
                                  const ShellMaterial& mat, double factor)
{
    check_vector(map);
    mat.validate();
    const Index n = 3 * map.n_merged;
    TripletAccumulator acc(n, n);
    const double ar = factor * mat.bending_stiffness();
    for (const ShellBC& bc : bcs)
    {
        if (!bc.clamped || bc.where != ShellBC::Where::Side)
            continue;
        const Patch& p = mp.patches.at(bc.patch);
        const Side s = static_cast<Side>(bc.index);
        const std::vector<double> br = p.side_basis(s).breaks();
        const GaussRule& g = gauss_rule(degree(p) + 2);
        for (std::size_t e = 0; e + 1 < br.size(); ++e)
        {
            const double t0 = br[e], t1 = br[e + 1];
            const auto el = side_element(p, s, t0, t1);
            const double h = element_size(p, el[0], el[1], el[2], el[3]);
            for (std::size_t q = 0; q < g.points.size(); ++q)
            {
                const auto uv = side_point(s, t0 + (t1 - t0) * g.points[q]);
                const ShellPoint sp = shell_point(p, uv[0], uv[1]);
                const Eigen::MatrixXd r = conormal(sp, s).transpose() * normal_variation(sp);
                const double w = (t1 - t0) * g.weights[q] * side_speed(sp, s);
                const std::vector<Index> rows = merged_rows(map, bc.patch, sp.idx);
                acc.add_block(rows, rows, (w * ar / h) * r.transpose() * r);
            }
        }
    }
    return acc.finish();
}

Eigen::MatrixXd rigid_body_modes(const MultiPatch& mp, const ExtractionMap& map)
{
    check_vector(map);
    const Index n = map.n_merged;
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(n, 3);
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
        for (Index l = 0; l < map.n_local(k); ++l)
            pts.row(map.merged_index(k, l)) = mp.patches[k].control_points.row(l);
    const Eigen::RowVector3d centre = pts.colwise().mean();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(3 * n, 6);
    for (Index m = 0; m < n; ++m)
    {
        const Eigen::Vector3d x = (pts.row(m) - centre).transpose();
        for (int c = 0; c < 3; ++c)
        {
            R(c * n + m, c) = 1.0;
            const Eigen::Vector3d r = Eigen::Vector3d::Unit(c).cross(x);
            for (int k = 0; k < 3; ++k)
                R(k * n + m, 3 + c) = r(k);
        }
    }
    return R;
}

ExtractionMap apply_strong_shell_bcs(const MultiPatch& mp, const ExtractionMap& map, const std::vector<ShellBC>& bcs)
{
    check_vector(map);
    std::set<Index> fixed;
    for (const ShellBC& bc : bcs)
    {
        const Patch& p = mp.patches.at(bc.patch);
        std::vector<Index> local;
        if (bc.where == ShellBC::Where::Side)
            local = p.side_indices(static_cast<Side>(bc.index));
        else
        {
            const Index nu = p.basis.u.size(), nv = p.basis.v.size();
            const int a = bc.index % 2, b = bc.index / 2;
            local.push_back(a * (nu - 1) + nu * (b * (nv - 1)));
        }
        for (Index l : local)
            for (int c = 0; c < 3; ++c)
                if (bc.fixed[c])
                    fixed.insert(c * map.n_merged + map.merged_index(bc.patch, l));
    }

    const Eigen::MatrixXd R = rigid_body_modes(mp, map);
    Eigen::MatrixXd BR(static_cast<Index>(fixed.size()), 6);
    std::vector<Triplet> trip;
    Index row = 0;
    for (Index i : fixed)
    {
        BR.row(row) = R.row(i);
        trip.emplace_back(row++, i, 1.0);
    }
    Index rank = 0;
    if (BR.rows() > 0)
    {
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(BR).singularValues();
        for (Index k = 0; k < sv.size(); ++k)
            rank += sv(k) > 1e-10 * sv(0);
    }
    if (rank < 6)
        throw ShellError("boundary conditions leave " + std::to_string(6 - rank) + " rigid body mode(s) free");

    SparseMatrix B(row, 3 * map.n_merged);
    B.setFromTriplets(trip.begin(), trip.end());
    return constrain(map, B);
}

ShellSystem apply_shell_bcs(const SparseMatrix& k_merged, const Eigen::VectorXd& f_merged, const MultiPatch& mp,
                            const ExtractionMap& map, const std::vector<ShellBC>& bcs, const ShellMaterial& mat,
                            double rotation_factor)
{
    ShellSystem sys;
    sys.map = apply_strong_shell_bcs(mp, map, bcs);
    const bool any_clamp = std::any_of(bcs.begin(), bcs.end(), [](const ShellBC& b) { return b.clamped; });
    if (any_clamp)
        sys.K = project(sys.map, SparseMatrix(k_merged + clamp_rotation_terms(mp, map, bcs, mat, rotation_factor)));
    else
        sys.K = project(sys.map, k_merged);
    sys.f = project(sys.map, f_merged);
    return sys;
}

double bending_energy(const Eigen::VectorXd& coeffs, const SparseMatrix& K)
{
    return 0.5 * coeffs.dot(K * coeffs);
}

ShellSolution solve_shell(ShellSystem system)
{
    ShellSolution sol;
    SpdSolver solver;
    try
    {
        solver.factorize(std::move(system.K));
    }
    catch (const LinalgError& e)
    {
        throw ShellError(std::string("shell system is singular after constraints: ") + e.what());
    }
    sol.coeffs = solver.solve(system.f);
    sol.energy = 0.5 * sol.coeffs.dot(solver.apply(sol.coeffs));
    sol.system = std::move(system);
    sol.system.K = solver.take_lower();
    return sol;
}

double von_mises_at(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs,
                    const ShellMaterial& mat, int patch, double u, double v)
{
    check_vector(map);
    const Eigen::VectorXd merged = map.merged(coeffs);
    return von_mises_local(shell_point(mp.patches.at(patch), u, v), local_displacements(map, merged, patch), mat);
}

std::vector<StressSample> von_mises_membrane(const MultiPatch& mp, const ExtractionMap& map,
                                             const Eigen::VectorXd& coeffs, const ShellMaterial& mat, int grid)
{
    check_vector(map);
    if (grid < 1)
        throw std::invalid_argument("stress grid needs at least one cell");
    const Eigen::VectorXd merged = map.merged(coeffs);
    std::vector<StressSample> out;
    out.reserve(mp.patches.size() * (grid + 1) * (grid + 1));
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Eigen::MatrixXd disp = local_displacements(map, merged, k);
        for (int j = 0; j <= grid; ++j)
            for (int i = 0; i <= grid; ++i)
            {
                StressSample s;
                s.patch = k;
                s.u = static_cast<double>(i) / grid;
                s.v = static_cast<double>(j) / grid;
                const ShellPoint sp = shell_point(mp.patches[k], s.u, s.v);
                s.x = sp.x;
                s.vm = von_mises_local(sp, disp, mat);
                out.push_back(s);
            }
    }
    return out;
}

InterfaceJump interface_stress_jump(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs,
                                    const ShellMaterial& mat, int samples)
{
    check_vector(map);
    InterfaceJump r;
    if (mp.interfaces.empty() || samples <= 0)
        return r;
    const Eigen::VectorXd merged = map.merged(coeffs);
    std::map<int, Eigen::MatrixXd> disp;
    auto local = [&](int k) -> const Eigen::MatrixXd& {
        auto it = disp.find(k);
        if (it == disp.end())
            it = disp.emplace(k, local_displacements(map, merged, k)).first;
        return it->second;
    };
    const int ni = static_cast<int>(mp.interfaces.size());
    r.per_interface.assign(ni, 0.0);
    double sum = 0.0;
    for (int i = 0; i < ni; ++i)
    {
        const Interface& itf = mp.interfaces[i];
        const int count = samples / ni + (i < samples % ni ? 1 : 0);
        for (int q = 0; q < count; ++q)
        {
            const double t = (q + 0.5) / count;
            const auto uva = side_point(itf.side_a, t);
            const auto uvb = side_point(itf.side_b, itf.reversed ? 1.0 - t : t);
            const double sa = von_mises_local(shell_point(mp.patches[itf.patch_a], uva[0], uva[1]),
                                              local(itf.patch_a), mat);
            const double sb = von_mises_local(shell_point(mp.patches[itf.patch_b], uvb[0], uvb[1]),
                                              local(itf.patch_b), mat);
            const double j = std::abs(sa - sb);
            r.max_jump = std::max(r.max_jump, j);
            r.per_interface[i] = std::max(r.per_interface[i], j);
            sum += j;
            ++r.samples;
        }
    }
    r.mean_jump = r.samples ? sum / r.samples : 0.0;
    return r;
}

double interface_displacement_jump(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs)
{
    check_vector(map);
    const Eigen::VectorXd merged = map.merged(coeffs);
    std::vector<Eigen::MatrixXd> disp;
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
        disp.push_back(local_displacements(map, merged, k));
    double sum = 0.0;
    for_each_interface_point(mp, [&](const Interface& itf, const ShellPoint& a, const ShellPoint& b, double w,
                                     double) {
        sum += w * (displacement_local(a, disp[itf.patch_a]) - displacement_local(b, disp[itf.patch_b])).squaredNorm();
    });
    return std::sqrt(sum);
}

void write_stress_csv(std::ostream& os, const std::vector<StressSample>& samples)
{
    os << "patch,u,v,x,y,z,von_mises\n";
    os.precision(12);
    for (const StressSample& s : samples)
        os << s.patch << ',' << s.u << ',' << s.v << ',' << s.x(0) << ',' << s.x(1) << ',' << s.x(2) << ',' << s.vm
           << '\n';
}

namespace {

std::vector<const StressSample*> patch_grid(const std::vector<StressSample>& samples, int patch, int grid)
{
    std::vector<const StressSample*> g;
    for (const StressSample& s : samples)
        if (s.patch == patch)
            g.push_back(&s);
    if (g.size() != static_cast<std::size_t>((grid + 1) * (grid + 1)))
        throw std::invalid_argument("sample set does not match the grid size");
    return g;
}

} // namespace

void write_stress_vtk(std::ostream& os, const std::vector<StressSample>& samples, int patch, int grid)
{
    const std::vector<const StressSample*> g = patch_grid(samples, patch, grid);
    os << "# vtk DataFile Version 3.0\nvon Mises membrane stress, patch " << patch << "\nASCII\n"
       << "DATASET STRUCTURED_GRID\nDIMENSIONS " << grid + 1 << ' ' << grid + 1 << " 1\n"
       << "POINTS " << g.size() << " double\n";
    os.precision(12);
    for (const StressSample* s : g)
        os << s->x(0) << ' ' << s->x(1) << ' ' << s->x(2) << '\n';
    os << "POINT_DATA " << g.size() << "\nSCALARS von_mises double 1\nLOOKUP_TABLE default\n";
    for (const StressSample* s : g)
        os << s->vm << '\n';
}

void write_stress_contours(std::ostream& os, const std::vector<StressSample>& samples, int grid,
                           const std::vector<double>& levels)
{
    os << "level,patch,x0,y0,z0,x1,y1,z1\n";
    os.precision(12);
    int np = 0;
    for (const StressSample& s : samples)
        np = std::max(np, s.patch + 1);
    for (int k = 0; k < np; ++k)
    {
        const std::vector<const StressSample*> g = patch_grid(samples, k, grid);
        auto at = [&](int i, int j) { return g[static_cast<std::size_t>(i + (grid + 1) * j)]; };
        for (double level : levels)
            for (int j = 0; j < grid; ++j)
                for (int i = 0; i < grid; ++i)
                {
                    // corners in cyclic order, crossings on the four cell edges
                    const StressSample* c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
                    std::vector<Eigen::Vector3d> cross;
                    for (int e = 0; e < 4; ++e)
                    {
                        const StressSample* a = c[e];
                        const StressSample* b = c[(e + 1) % 4];
                        if ((a->vm < level) == (b->vm < level))
                            continue;
                        const double s = (level - a->vm) / (b->vm - a->vm);
                        cross.push_back(a->x + s * (b->x - a->x));
                    }
                    for (std::size_t m = 0; m + 1 < cross.size(); m += 2)
                        os << level << ',' << k << ',' << cross[m](0) << ',' << cross[m](1) << ',' << cross[m](2)
                           << ',' << cross[m + 1](0) << ',' << cross[m + 1](1) << ',' << cross[m + 1](2) << '\n';
                }
    }
}

std::vector<ShellBC> hyperbolic_shell_bcs(const MultiPatch& mp)
{
    double xmin = std::numeric_limits<double>::infinity();
    for (const Patch& p : mp.patches)
        xmin = std::min(xmin, p.control_points.col(0).minCoeff());
    const double tol = 1e-8 * mp.diameter();
    std::vector<ShellBC> bcs;
    for (const BoundarySide& b : mp.boundaries)
    {
        const Patch& p = mp.patches[b.patch];
        bool on = true;
        for (Index l : p.side_indices(b.side))
            on = on && std::abs(p.control_points(l, 0) - xmin) <= tol;
        if (on)
            bcs.push_back(ShellBC::clamped_side(b.patch, b.side));
    }
    if (bcs.empty())
        throw ShellError("no boundary side on the minimum-x edge");
    return bcs;
}

std::vector<ShellBC> elliptic_shell_bcs(const MultiPatch& mp, bool fix_spin)
{
    Eigen::Vector2d lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (const Patch& p : mp.patches)
        for (int d = 0; d < 2; ++d)
        {
            lo(d) = std::min(lo(d), p.control_points.col(d).minCoeff());
            hi(d) = std::max(hi(d), p.control_points.col(d).maxCoeff());
        }
    const double tol = 1e-8 * mp.diameter();
    auto find_corner = [&](double x, double y) {
        for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
            for (int c = 0; c < 4; ++c)
            {
                const Eigen::VectorXd q = mp.patches[k].corner(c);
                if (std::abs(q(0) - x) <= tol && std::abs(q(1) - y) <= tol)
                    return std::pair<int, int>{k, c};
            }
        throw ShellError("domain corner is not a patch corner");
    };
    std::vector<ShellBC> bcs;
    for (const Eigen::Vector2d& q : {lo, Eigen::Vector2d(hi(0), lo(1)), Eigen::Vector2d(lo(0), hi(1)), hi})
    {
        const auto [k, c] = find_corner(q(0), q(1));
        bcs.push_back(ShellBC::fixed_vertical(k, c));
    }
    const auto [k0, c0] = find_corner(lo(0), lo(1));
    bcs.push_back(ShellBC::fixed_corner(k0, c0));
    if (fix_spin)
    {
        const auto [k1, c1] = find_corner(hi(0), lo(1));
        bcs.push_back(ShellBC::fixed_corner(k1, c1, {false, true, true}));
    }
    return bcs;
}

} // namespace mpiga
