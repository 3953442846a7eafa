/** @file multipatch.cpp

    @brief Patch geometry, topology detection and benchmark domain factories.
*/

#include "mpiga/multipatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mpiga {

std::array<double, 2> side_point(Side s, double t)
{
    switch (s)
    {
    case Side::West: return {0.0, t};
    case Side::East: return {1.0, t};
    case Side::South: return {t, 0.0};
    case Side::North: return {t, 1.0};
    }
    return {0.0, 0.0};
}

std::array<int, 2> side_corners(Side s)
{
    switch (s)
    {
    case Side::West: return {0, 2};
    case Side::East: return {1, 3};
    case Side::South: return {0, 1};
    case Side::North: return {2, 3};
    }
    return {0, 0};
}

std::array<double, 2> side_param_normal(Side s)
{
    switch (s)
    {
    case Side::West: return {-1.0, 0.0};
    case Side::East: return {1.0, 0.0};
    case Side::South: return {0.0, -1.0};
    case Side::North: return {0.0, 1.0};
    }
    return {0.0, 0.0};
}

std::vector<Index> Patch::side_indices(Side s, int layer) const
{
    const Index nu = basis.u.size(), nv = basis.v.size();
    std::vector<Index> out;
    switch (s)
    {
    case Side::West:
    case Side::East: {
        const Index i = s == Side::West ? layer : nu - 1 - layer;
        for (Index j = 0; j < nv; ++j)
            out.push_back(basis.index(i, j));
        break;
    }
    case Side::South:
    case Side::North: {
        const Index j = s == Side::South ? layer : nv - 1 - layer;
        for (Index i = 0; i < nu; ++i)
            out.push_back(basis.index(i, j));
        break;
    }
    }
    return out;
}

const BasisSpec1D& Patch::side_basis(Side s) const
{
    return side_direction(s) == 0 ? basis.u : basis.v;
}

Eigen::VectorXd Patch::corner(int c) const
{
    const Index i = (c & 1) ? basis.u.size() - 1 : 0;
    const Index j = (c & 2) ? basis.v.size() - 1 : 0;
    return control_points.row(basis.index(i, j)).transpose();
}

Patch make_bilinear_patch(const std::array<Eigen::VectorXd, 4>& corners)
{
    const BasisSpec1D lin(1, {0.0, 0.0, 1.0, 1.0});
    Patch p{TensorBasisSpec{lin, lin}, Eigen::MatrixXd(4, corners[0].size())};
    for (int c = 0; c < 4; ++c)
        p.control_points.row(c) = corners[c].transpose();
    return p;
}

GeometryEval eval_geometry(const Patch& patch, double u, double v, int order)
{
    const TensorBasisEval tb = eval_tensor_basis(patch.basis, u, v, order);
    GeometryEval g{Eigen::MatrixXd::Zero(patch.dim(), tb.values.rows())};
    for (std::size_t k = 0; k < tb.indices.size(); ++k)
        g.derivs.noalias() += patch.control_points.row(tb.indices[k]).transpose() *
                              tb.values.col(static_cast<Index>(k)).transpose();
    return g;
}

SurfaceFrame surface_frame(const GeometryEval& g)
{
    if (g.derivs.rows() != 3 || g.derivs.cols() < num_deriv_slots(2))
        throw GeometryError("surface frame needs a 3D patch evaluated to second order");
    SurfaceFrame f;
    f.a1 = g.derivs.col(deriv_slot(1, 0));
    f.a2 = g.derivs.col(deriv_slot(0, 1));
    f.d11 = g.derivs.col(deriv_slot(2, 0));
    f.d12 = g.derivs.col(deriv_slot(1, 1));
    f.d22 = g.derivs.col(deriv_slot(0, 2));
    const Eigen::Vector3d n = f.a1.cross(f.a2);
    f.jac_det = n.norm();
    if (f.jac_det < 1e-14 * f.a1.norm() * f.a2.norm() || f.jac_det == 0.0)
        throw GeometryError("degenerate surface tangents");
    f.a3 = n / f.jac_det;
    f.metric << f.a1.dot(f.a1), f.a1.dot(f.a2), f.a2.dot(f.a1), f.a2.dot(f.a2);
    f.curvature << f.a3.dot(f.d11), f.a3.dot(f.d12), f.a3.dot(f.d12), f.a3.dot(f.d22);
    return f;
}

SurfaceFrame surface_frame(const Patch& patch, double u, double v)
{
    return surface_frame(eval_geometry(patch, u, v, 2));
}

bool Vertex::extraordinary() const
{
    if (location == VertexLocation::Interior)
        return valence != 4;
    return valence >= 3;
}

double MultiPatch::diameter() const
{
    if (patches.empty())
        return 0.0;
    Eigen::VectorXd lo = patches[0].control_points.colwise().minCoeff().transpose();
    Eigen::VectorXd hi = patches[0].control_points.colwise().maxCoeff().transpose();
    for (const Patch& p : patches)
    {
        lo = lo.cwiseMin(p.control_points.colwise().minCoeff().transpose());
        hi = hi.cwiseMax(p.control_points.colwise().maxCoeff().transpose());
    }
    return (hi - lo).norm();
}

int MultiPatch::count_interior_ev() const
{
    return static_cast<int>(std::count_if(vertices.begin(), vertices.end(), [](const Vertex& v) {
        return v.location == VertexLocation::Interior && v.extraordinary();
    }));
}

int MultiPatch::count_boundary_ev() const
{
    return static_cast<int>(std::count_if(vertices.begin(), vertices.end(), [](const Vertex& v) {
        return v.location == VertexLocation::Boundary && v.extraordinary();
    }));
}

namespace {

Eigen::VectorXd side_curve_point(const Patch& p, Side s, double t)
{
    const auto uv = side_point(s, t);
    return eval_geometry(p, uv[0], uv[1], 0).point();
}

} // namespace

double interface_gap(const MultiPatch& mp, const Interface& itf, int samples)
{
    const Patch& a = mp.patches[itf.patch_a];
    const Patch& b = mp.patches[itf.patch_b];
    double gap = 0.0;
    for (int k = 0; k < samples; ++k)
    {
        const double t = samples == 1 ? 0.5 : static_cast<double>(k) / (samples - 1);
        const double tb = itf.reversed ? 1.0 - t : t;
        gap = std::max(gap, (side_curve_point(a, itf.side_a, t) - side_curve_point(b, itf.side_b, tb)).norm());
    }
    return gap;
}

MultiPatch detect_topology(std::vector<Patch> patches, double tol)
{
    MultiPatch mp;
    mp.patches = std::move(patches);
    if (mp.patches.empty())
        return mp;
    for (const Patch& p : mp.patches)
        if (p.dim() != mp.patches.front().dim())
            throw GeometryError("patches of mixed dimension");
    if (tol <= 0.0)
        tol = 1e-8 * std::max(mp.diameter(), std::numeric_limits<double>::min());

    const auto np = static_cast<int>(mp.patches.size());
    std::vector<std::array<int, 4>> partner(np);
    for (auto& a : partner)
        a.fill(-1);

    for (int pa = 0; pa < np; ++pa)
        for (Side sa : kAllSides)
        {
            const Patch& A = mp.patches[pa];
            const auto ca = side_corners(sa);
            const Eigen::VectorXd a0 = A.corner(ca[0]), a1 = A.corner(ca[1]);
            for (int pb = pa; pb < np; ++pb)
                for (Side sb : kAllSides)
                {
                    if (pb == pa && static_cast<int>(sb) <= static_cast<int>(sa))
                        continue;
                    const Patch& B = mp.patches[pb];
                    const auto cb = side_corners(sb);
                    const Eigen::VectorXd b0 = B.corner(cb[0]), b1 = B.corner(cb[1]);
                    bool reversed;
                    if ((a0 - b0).norm() <= tol && (a1 - b1).norm() <= tol)
                        reversed = false;
                    else if ((a0 - b1).norm() <= tol && (a1 - b0).norm() <= tol)
                        reversed = true;
                    else
                        continue;
                    if ((a0 - a1).norm() <= tol)
                        continue; // collapsed side
                    const Interface cand{pa, sa, pb, sb, reversed};
                    if (interface_gap(mp, cand, 10) > tol)
                        continue;
                    if (partner[pa][static_cast<int>(sa)] >= 0 || partner[pb][static_cast<int>(sb)] >= 0)
                    {
                        std::ostringstream os;
                        os << "non-manifold configuration: side " << static_cast<int>(sa) << " of patch " << pa
                           << " or side " << static_cast<int>(sb) << " of patch " << pb
                           << " matches more than one partner";
                        throw GeometryError(os.str());
                    }
                    partner[pa][static_cast<int>(sa)] = static_cast<int>(mp.interfaces.size());
                    partner[pb][static_cast<int>(sb)] = static_cast<int>(mp.interfaces.size());
                    mp.interfaces.push_back(cand);
                }
        }

    for (int p = 0; p < np; ++p)
        for (Side s : kAllSides)
            if (partner[p][static_cast<int>(s)] < 0)
                mp.boundaries.push_back({p, s});

    // vertices: corners clustered by position
    for (int p = 0; p < np; ++p)
        for (int c = 0; c < 4; ++c)
        {
            const Eigen::VectorXd x = mp.patches[p].corner(c);
            auto it = std::find_if(mp.vertices.begin(), mp.vertices.end(),
                                   [&](const Vertex& v) { return (v.point - x).norm() <= tol; });
            if (it == mp.vertices.end())
            {
                mp.vertices.push_back(Vertex{x, {}, 0, VertexLocation::Interior});
                it = std::prev(mp.vertices.end());
            }
            it->incident.emplace_back(p, c);
            const Side su = (c & 1) ? Side::East : Side::West;
            const Side sv = (c & 2) ? Side::North : Side::South;
            if (partner[p][static_cast<int>(su)] < 0 || partner[p][static_cast<int>(sv)] < 0)
                it->location = VertexLocation::Boundary;
        }
    for (Vertex& v : mp.vertices)
        v.valence = static_cast<int>(v.incident.size());
    return mp;
}

MultiPatch make_unit_square()
{
    std::array<Eigen::VectorXd, 4> c{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
                                     Eigen::Vector2d(1, 1)};
    return detect_topology({make_bilinear_patch(c)});
}

MultiPatch make_fig_domain()
{
    const double a = 1.0 / 3.0, b = 2.0 / 3.0;
    // corner lists in the order they are usually quoted
    const std::array<std::array<Eigen::Vector2d, 4>, 6> ccw{{
        {Eigen::Vector2d(0, 0), Eigen::Vector2d(a, 0), Eigen::Vector2d(a, b), Eigen::Vector2d(0, b)},
        {Eigen::Vector2d(a, 0), Eigen::Vector2d(b, 0), Eigen::Vector2d(b, a), Eigen::Vector2d(a, b)},
        {Eigen::Vector2d(b, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, a), Eigen::Vector2d(b, a)},
        {Eigen::Vector2d(0, b), Eigen::Vector2d(a, b), Eigen::Vector2d(a, 1), Eigen::Vector2d(0, 1)},
        {Eigen::Vector2d(a, b), Eigen::Vector2d(b, a), Eigen::Vector2d(1, a), Eigen::Vector2d(1, b)},
        {Eigen::Vector2d(a, b), Eigen::Vector2d(a, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(1, b)},
    }};
    std::vector<Patch> patches;
    for (auto q : ccw)
    {
        double area2 = 0.0;
        for (int k = 0; k < 4; ++k)
            area2 += q[k].x() * q[(k + 1) % 4].y() - q[(k + 1) % 4].x() * q[k].y();
        if (area2 < 0.0)
            std::swap(q[1], q[3]); // the sixth list runs clockwise
        patches.push_back(make_bilinear_patch({q[0], q[1], q[3], q[2]}));
    }
    return detect_topology(std::move(patches));
}

MultiPatch transform_planar(const MultiPatch& mp, double scale, const Eigen::Vector2d& shift)
{
    MultiPatch out = mp;
    for (Patch& p : out.patches)
    {
        p.control_points.leftCols(2) *= scale;
        p.control_points.leftCols(2).rowwise() += shift.transpose();
    }
    for (Vertex& v : out.vertices)
        v.point.head(2) = scale * v.point.head(2) + shift;
    return out;
}

double paraboloid_height(ParaboloidKind kind, double x, double y)
{
    return kind == ParaboloidKind::Hyperbolic ? x * x - y * y : 1.0 - 2.0 * (x * x + y * y);
}

Patch refine_patch(const Patch& patch, const TensorBasisSpec& target)
{
    const Eigen::MatrixXd Tu = transfer_matrix(patch.basis.u, target.u);
    const Eigen::MatrixXd Tv = transfer_matrix(patch.basis.v, target.v);
    const Index nu = patch.basis.u.size(), nv = patch.basis.v.size();
    Patch out{target, Eigen::MatrixXd(target.size(), patch.dim())};
    for (int d = 0; d < patch.dim(); ++d)
    {
        const Eigen::MatrixXd grid = Eigen::Map<const Eigen::MatrixXd>(patch.control_points.col(d).data(), nu, nv);
        const Eigen::MatrixXd fine = Tu * grid * Tv.transpose();
        out.control_points.col(d) = Eigen::Map<const Eigen::VectorXd>(fine.data(), fine.size());
    }
    return out;
}

namespace {

BasisSpec1D elevated_to(const BasisSpec1D& b, int degree)
{
    BasisSpec1D cur = b;
    Eigen::MatrixXd dummy = Eigen::MatrixXd::Zero(cur.size(), 1);
    while (cur.degree() < degree)
    {
        auto [s, c] = elevate_degree(cur, dummy);
        cur = std::move(s);
        dummy = std::move(c);
    }
    return cur;
}

} // namespace

MultiPatch make_paraboloid(ParaboloidKind kind, const MultiPatch& base, int degree)
{
    if (degree < 2)
        throw GeometryError("paraboloid lift needs degree >= 2");
    if (base.dim() != 2)
        throw GeometryError("paraboloid lift needs a planar base multipatch");
    std::vector<Patch> lifted;
    for (const Patch& p : base.patches)
    {
        const TensorBasisSpec target{elevated_to(p.basis.u, degree), elevated_to(p.basis.v, degree)};
        const Patch planar = refine_patch(p, target);
        const auto gu = greville_points(target.u), gv = greville_points(target.v);
        const Index nu = target.u.size(), nv = target.v.size();
        Eigen::MatrixXd F(nu, nv);
        for (Index j = 0; j < nv; ++j)
            for (Index i = 0; i < nu; ++i)
            {
                const Eigen::VectorXd x = eval_geometry(planar, gu[i], gv[j], 0).point();
                F(i, j) = paraboloid_height(kind, x(0), x(1));
            }
        const Eigen::MatrixXd Au = collocation_matrix(target.u, gu);
        const Eigen::MatrixXd Av = collocation_matrix(target.v, gv);
        const Eigen::MatrixXd Z = Av.partialPivLu().solve(Au.partialPivLu().solve(F).transpose()).transpose();
        Patch out{target, Eigen::MatrixXd(target.size(), 3)};
        out.control_points.leftCols(2) = planar.control_points;
        out.control_points.col(2) = Eigen::Map<const Eigen::VectorXd>(Z.data(), Z.size());
        lifted.push_back(std::move(out));
    }
    return detect_topology(std::move(lifted));
}

MultiPatch refine_to(const MultiPatch& mp, int degree, int regularity, int elements)
{
    if (regularity < 0 || regularity >= degree)
        throw GeometryError("regularity must satisfy 0 <= r <= p-1");
    MultiPatch out = mp;
    const BasisSpec1D target = BasisSpec1D::uniform(degree, elements, regularity);
    for (Patch& p : out.patches)
        p = refine_patch(p, TensorBasisSpec{target, target});
    return out;
}

bool invert_point(const Patch& patch, const Eigen::VectorXd& target, std::array<double, 2>& uv, double tol)
{
    // coarse start from a sample grid
    double best = std::numeric_limits<double>::infinity();
    constexpr int kGrid = 8;
    for (int j = 0; j <= kGrid; ++j)
        for (int i = 0; i <= kGrid; ++i)
        {
            const double u = static_cast<double>(i) / kGrid, v = static_cast<double>(j) / kGrid;
            const double d = (eval_geometry(patch, u, v, 0).point() - target).norm();
            if (d < best)
            {
                best = d;
                uv = {u, v};
            }
        }
    for (int it = 0; it < 50; ++it)
    {
        const GeometryEval g = eval_geometry(patch, uv[0], uv[1], 1);
        const Eigen::VectorXd r = g.point() - target;
        if (r.norm() <= tol)
            return true;
        const Eigen::MatrixXd J = g.jacobian();
        const Eigen::Vector2d step = (J.transpose() * J).ldlt().solve(J.transpose() * r);
        uv[0] = std::clamp(uv[0] - step(0), 0.0, 1.0);
        uv[1] = std::clamp(uv[1] - step(1), 0.0, 1.0);
    }
    return (eval_geometry(patch, uv[0], uv[1], 0).point() - target).norm() <= tol;
}

} // namespace mpiga
