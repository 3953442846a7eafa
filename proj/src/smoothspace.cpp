/** @file smoothspace.cpp

    @brief Extraction maps, C1 constraints and the requirement gate.
*/

#include "mpiga/smoothspace.hpp"
#include "mpiga/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace mpiga {

std::string to_string(CouplingKind k)
{
    switch (k)
    {
    case CouplingKind::SinglePatch: return "single";
    case CouplingKind::C0Merged: return "c0";
    case CouplingKind::Uncoupled: return "uncoupled";
    case CouplingKind::SmoothC1: return "smooth-c1";
    }
    return "?";
}

SparseMatrix ExtractionMap::merge_matrix() const
{
    const Index nl = patch_offsets.back();
    SparseMatrix m(nl, n_merged);
    std::vector<Triplet> t;
    t.reserve(nl);
    for (Index l = 0; l < nl; ++l)
        t.emplace_back(l, local_to_merged[l], 1.0);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseMatrix ExtractionMap::patch_block(int patch) const
{
    const Index nl = n_local(patch);
    SparseMatrix sel(components * nl, components * n_merged);
    std::vector<Triplet> t;
    for (int c = 0; c < components; ++c)
        for (Index l = 0; l < nl; ++l)
            t.emplace_back(c * nl + l, c * n_merged + merged_index(patch, l), 1.0);
    sel.setFromTriplets(t.begin(), t.end());
    return sel * reduce;
}

Eigen::MatrixXd ExtractionMap::patch_coefficients(int patch, const Eigen::VectorXd& global) const
{
    const Eigen::VectorXd m = reduce * global;
    const Index nl = n_local(patch);
    Eigen::MatrixXd out(nl, components);
    for (int c = 0; c < components; ++c)
        for (Index l = 0; l < nl; ++l)
            out(l, c) = m(c * n_merged + merged_index(patch, l));
    return out;
}

namespace {

SparseMatrix sparse_identity(Index n)
{
    SparseMatrix i(n, n);
    i.setIdentity();
    return i;
}

std::vector<Index> offsets_of(const MultiPatch& mp)
{
    std::vector<Index> off{0};
    for (const Patch& p : mp.patches)
        off.push_back(off.back() + p.basis.size());
    return off;
}

int uf_find(std::vector<Index>& parent, Index x)
{
    while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
    return static_cast<int>(x);
}

bool reversed_equal(const BasisSpec1D& a, const BasisSpec1D& b)
{
    if (a.degree() != b.degree() || a.knots().size() != b.knots().size())
        return false;
    const auto& ka = a.knots();
    const auto& kb = b.knots();
    const double lo = ka.front(), hi = ka.back();
    for (std::size_t i = 0; i < ka.size(); ++i)
        if (std::abs((lo + hi - kb[kb.size() - 1 - i]) - ka[i]) > 1e-12 * (1.0 + std::abs(hi)))
            return false;
    return true;
}

/// Unnormalized outward normal of a side in the planar projection.
Eigen::Vector2d side_normal(const Eigen::Matrix2d& jac, Side s)
{
    const int dir = side_direction(s);
    const Eigen::Vector2d tau = jac.col(dir);
    Eigen::Vector2d n(tau(1), -tau(0));
    const auto pn = side_param_normal(s);
    const Eigen::Vector2d outward = jac * Eigen::Vector2d(pn[0], pn[1]);
    if (n.dot(outward) < 0.0)
        n = -n;
    return n;
}

} // namespace

ExtractionMap build_identity_map(const MultiPatch& mp)
{
    ExtractionMap m;
    m.kind = mp.patches.size() == 1 ? CouplingKind::SinglePatch : CouplingKind::Uncoupled;
    m.patch_offsets = offsets_of(mp);
    m.n_merged = m.patch_offsets.back();
    m.local_to_merged.resize(m.n_merged);
    std::iota(m.local_to_merged.begin(), m.local_to_merged.end(), Index{0});
    m.reduce = sparse_identity(m.n_merged);
    return m;
}

ExtractionMap build_c0_map(const MultiPatch& mp)
{
    ExtractionMap m;
    m.kind = mp.patches.size() == 1 ? CouplingKind::SinglePatch : CouplingKind::C0Merged;
    m.patch_offsets = offsets_of(mp);
    const Index nl = m.patch_offsets.back();
    std::vector<Index> parent(nl);
    std::iota(parent.begin(), parent.end(), Index{0});
    for (const Interface& itf : mp.interfaces)
    {
        const Patch& a = mp.patches[itf.patch_a];
        const Patch& b = mp.patches[itf.patch_b];
        const BasisSpec1D& ba = a.side_basis(itf.side_a);
        const BasisSpec1D& bb = b.side_basis(itf.side_b);
        if (!(itf.reversed ? reversed_equal(ba, bb) : ba == bb))
            throw CouplingError("knot vectors do not match across interface between patches " +
                                std::to_string(itf.patch_a) + " and " + std::to_string(itf.patch_b));
        std::vector<Index> ia = a.side_indices(itf.side_a);
        std::vector<Index> ib = b.side_indices(itf.side_b);
        if (itf.reversed)
            std::reverse(ib.begin(), ib.end());
        for (std::size_t k = 0; k < ia.size(); ++k)
        {
            const int ra = uf_find(parent, m.patch_offsets[itf.patch_a] + ia[k]);
            const int rb = uf_find(parent, m.patch_offsets[itf.patch_b] + ib[k]);
            parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    m.local_to_merged.assign(nl, -1);
    std::vector<Index> root_id(nl, -1);
    for (Index l = 0; l < nl; ++l)
    {
        const int r = uf_find(parent, l);
        if (root_id[r] < 0)
            root_id[r] = m.n_merged++;
        m.local_to_merged[l] = root_id[r];
    }
    m.reduce = sparse_identity(m.n_merged);
    return m;
}

SparseMatrix build_c1_constraints(const MultiPatch& mp, const ExtractionMap& c0map)
{
    std::vector<Triplet> trip;
    Index row = 0;
    std::vector<std::pair<Index, double>> entries;
    for (const Interface& itf : mp.interfaces)
    {
        const Patch& pa = mp.patches[itf.patch_a];
        const Patch& pb = mp.patches[itf.patch_b];
        const BasisSpec1D& sb = pa.side_basis(itf.side_a);
        const int q = sb.degree() + 3;
        const std::vector<double> br = sb.breaks();
        for (std::size_t e = 0; e + 1 < br.size(); ++e)
        {
            const double mid = 0.5 * (br[e] + br[e + 1]), half = 0.5 * (br[e + 1] - br[e]);
            for (int k = 0; k < q; ++k)
            {
                const double t = mid + half * std::cos((2 * k + 1) * std::numbers::pi / (2 * q));
                const auto ua = side_point(itf.side_a, t);
                const auto ub = side_point(itf.side_b, itf.reversed ? 1.0 - t : t);
                const PhysicalEval ea = physical_basis(pa, ua[0], ua[1], 1);
                const PhysicalEval eb = physical_basis(pb, ub[0], ub[1], 1);
                const double scale = ea.det * eb.det;
                const Eigen::Vector2d n = side_normal(ea.jacobian, itf.side_a);
                entries.clear();
                for (std::size_t f = 0; f < ea.indices.size(); ++f)
                    entries.emplace_back(c0map.merged_index(itf.patch_a, ea.indices[f]),
                                         scale * (ea.values(1, f) * n(0) + ea.values(2, f) * n(1)));
                for (std::size_t f = 0; f < eb.indices.size(); ++f)
                    entries.emplace_back(c0map.merged_index(itf.patch_b, eb.indices[f]),
                                         -scale * (eb.values(1, f) * n(0) + eb.values(2, f) * n(1)));
                std::sort(entries.begin(), entries.end());
                // sum duplicates (shared trace DoFs) and drop cancellation noise
                std::vector<std::pair<Index, double>> merged;
                for (const auto& [j, v] : entries)
                    if (!merged.empty() && merged.back().first == j)
                        merged.back().second += v;
                    else
                        merged.emplace_back(j, v);
                double vmax = 0.0;
                for (const auto& [j, v] : merged)
                    vmax = std::max(vmax, std::abs(v));
                for (const auto& [j, v] : merged)
                    if (std::abs(v) > 1e-13 * vmax)
                        trip.emplace_back(row, j, v);
                ++row;
            }
        }
    }
    SparseMatrix c(row, c0map.n_merged);
    c.setFromTriplets(trip.begin(), trip.end());
    c.makeCompressed();
    return c;
}

SparseMatrix boundary_value_rows(const MultiPatch& mp, const ExtractionMap& map)
{
    std::set<Index> dofs;
    for (const BoundarySide& b : mp.boundaries)
        for (Index l : mp.patches[b.patch].side_indices(b.side))
            dofs.insert(map.merged_index(b.patch, l));
    SparseMatrix r(static_cast<Index>(dofs.size()), map.n_merged);
    std::vector<Triplet> t;
    Index row = 0;
    for (Index d : dofs)
        t.emplace_back(row++, d, 1.0);
    r.setFromTriplets(t.begin(), t.end());
    return r;
}

ExtractionMap build_smooth_c1_map(const SparseMatrix& c, const ExtractionMap& c0map, double tol)
{
    if (c.cols() != c0map.components * c0map.n_merged)
        throw CouplingError("constraint matrix does not match the merged numbering");
    ExtractionMap m = c0map;
    m.kind = c0map.patch_offsets.size() == 2 ? CouplingKind::SinglePatch : CouplingKind::SmoothC1;
    m.reduce = c0map.reduce * nullspace_basis(c, tol);
    m.reduce.makeCompressed();
    return m;
}

ExtractionMap build_smooth_c1_map(const MultiPatch& mp, bool zero_boundary_values, double tol)
{
    const ExtractionMap c0 = build_c0_map(mp);
    SparseMatrix c = build_c1_constraints(mp, c0);
    if (zero_boundary_values)
    {
        const SparseMatrix b = boundary_value_rows(mp, c0);
        SparseMatrix stacked(c.rows() + b.rows(), c.cols());
        std::vector<Triplet> t;
        for (Index k = 0; k < c.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(c, k); it; ++it)
                t.emplace_back(it.row(), it.col(), it.value());
        for (Index k = 0; k < b.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(b, k); it; ++it)
                t.emplace_back(c.rows() + it.row(), it.col(), it.value());
        stacked.setFromTriplets(t.begin(), t.end());
        c = std::move(stacked);
    }
    return build_smooth_c1_map(c, c0, tol);
}

ExtractionMap constrain(const ExtractionMap& map, const SparseMatrix& b, double tol)
{
    if (b.cols() != map.reduce.rows())
        throw CouplingError("constraint rows do not match the merged numbering");
    SparseMatrix br = b * map.reduce;
    double vmax = 0.0;
    for (Index k = 0; k < br.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(br, k); it; ++it)
            vmax = std::max(vmax, std::abs(it.value()));
    br.prune([&](Index, Index, double v) { return std::abs(v) > 1e-14 * vmax; });
    ExtractionMap m = map;
    m.reduce = map.reduce * nullspace_basis(br, tol);
    m.reduce.makeCompressed();
    return m;
}

ExtractionMap vector_map(const ExtractionMap& scalar, int components)
{
    if (scalar.components != 1)
        throw CouplingError("vector_map expects a scalar map");
    ExtractionMap m = scalar;
    m.components = components;
    const SparseMatrix& z = scalar.reduce;
    std::vector<Triplet> t;
    t.reserve(components * z.nonZeros());
    for (int c = 0; c < components; ++c)
        for (Index k = 0; k < z.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(z, k); it; ++it)
                t.emplace_back(c * z.rows() + it.row(), c * z.cols() + it.col(), it.value());
    m.reduce = SparseMatrix(components * z.rows(), components * z.cols());
    m.reduce.setFromTriplets(t.begin(), t.end());
    return m;
}

// ---------------------------------------------------------------------------
// requirement gate

namespace {

bool is_bilinear(const Patch& p, double tol)
{
    std::array<Eigen::Vector2d, 4> c;
    for (int k = 0; k < 4; ++k)
        c[k] = p.corner(k).head(2);
    for (int j = 0; j <= 4; ++j)
        for (int i = 0; i <= 4; ++i)
        {
            const double u = i / 4.0, v = j / 4.0;
            const Eigen::Vector2d bl =
                (1 - u) * (1 - v) * c[0] + u * (1 - v) * c[1] + (1 - u) * v * c[2] + u * v * c[3];
            if ((eval_geometry(p, u, v, 0).point().head(2) - bl).norm() > tol)
                return false;
        }
    return true;
}

/// 3D curvature tensor sum b_ab a^a (x) a^b of a surface point.
Eigen::Matrix3d curvature_tensor(const SurfaceFrame& f)
{
    const Eigen::Matrix2d ainv = f.metric.inverse();
    const Eigen::Vector3d c1 = ainv(0, 0) * f.a1 + ainv(0, 1) * f.a2;
    const Eigen::Vector3d c2 = ainv(1, 0) * f.a1 + ainv(1, 1) * f.a2;
    return f.curvature(0, 0) * c1 * c1.transpose() + f.curvature(0, 1) * (c1 * c2.transpose() + c2 * c1.transpose()) +
           f.curvature(1, 1) * c2 * c2.transpose();
}

/// Geometric continuity across interfaces: 2 for planar domains, otherwise
/// the highest of {0,1,2} confirmed at sample points.
int geometric_continuity(const MultiPatch& mp)
{
    if (mp.dim() != 3)
        return 2;
    int order = 2;
    for (const Interface& itf : mp.interfaces)
        for (int k = 0; k < 9; ++k)
        {
            const double t = (k + 0.5) / 9.0;
            const auto ua = side_point(itf.side_a, t);
            const auto ub = side_point(itf.side_b, itf.reversed ? 1.0 - t : t);
            const SurfaceFrame fa = surface_frame(mp.patches[itf.patch_a], ua[0], ua[1]);
            const SurfaceFrame fb = surface_frame(mp.patches[itf.patch_b], ub[0], ub[1]);
            if ((fa.a3 - fb.a3).norm() > 1e-6)
                return 0;
            const Eigen::Matrix3d ka = curvature_tensor(fa), kb = curvature_tensor(fb);
            if ((ka - kb).norm() > 1e-6 * (1.0 + ka.norm()))
                order = 1;
        }
    return order;
}

} // namespace

bool RequirementReport::any_passed() const
{
    return std::any_of(methods.begin(), methods.end(), [](const MethodCheck& m) { return m.passed; });
}

std::string RequirementReport::summary() const
{
    std::ostringstream os;
    os << "iEV=" << interior_ev << " bEV=" << boundary_ev << '\n';
    for (const MethodCheck& m : methods)
    {
        os << m.name << ": " << (m.passed ? "pass" : "fail");
        for (const std::string& r : m.reasons)
            os << "; " << r;
        os << '\n';
    }
    return os.str();
}

RequirementReport check_requirements(const MultiPatch& mp, int p, int r)
{
    RequirementReport rep;
    rep.interior_ev = mp.count_interior_ev();
    rep.boundary_ev = mp.count_boundary_ev();
    for (const Vertex& v : mp.vertices)
        if (v.location == VertexLocation::Boundary && v.extraordinary())
            rep.max_boundary_ev_valence = std::max(rep.max_boundary_ev_valence, v.valence);

    const int g = geometric_continuity(mp);
    bool bilinear = true;
    for (const Patch& patch : mp.patches)
        bilinear = bilinear && is_bilinear(patch, 1e-8 * std::max(mp.diameter(), 1e-300));

    auto need = [](MethodCheck& m, bool ok, const std::string& why) {
        if (!ok)
        {
            m.passed = false;
            m.reasons.push_back(why);
        }
    };
    const std::string ps = std::to_string(p), rs = std::to_string(r);

    MethodCheck asg1{"AS-G1", true, {}};
    need(asg1, p >= 3, "degree p=" + ps + " < 3");
    need(asg1, r <= p - 2, "regularity r=" + rs + " > p-2");
    need(asg1, bilinear, "geometry not analysis-suitable (patches are not bilinear)");
    need(asg1, g >= 1, "geometry is not G1 across interfaces");

    MethodCheck approx{"Approx-C1", true, {}};
    need(approx, p >= 3, "degree p=" + ps + " < 3");
    need(approx, r <= p - 1, "regularity r=" + rs + " > p-1");
    need(approx, g >= 2, "geometry is not G2 across interfaces");

    MethodCheck dpatch{"D-Patch", true, {}};
    need(dpatch, p >= 3, "degree p=" + ps + " < 3");
    need(dpatch, r <= p - 1, "regularity r=" + rs + " > p-1");
    need(dpatch, rep.max_boundary_ev_valence <= 3,
         "boundary EV of valence " + std::to_string(rep.max_boundary_ev_valence) + " > 3");
    need(dpatch, g >= 1, "geometry is not C1 across interfaces");

    MethodCheck almost{"Almost-C1", true, {}};
    need(almost, p == 2, "degree p=" + ps + " != 2");
    need(almost, r == 1, "regularity r=" + rs + " != 1");
    need(almost, g >= 1, "geometry is not C1 across interfaces");

    rep.methods = {asg1, approx, dpatch, almost};
    return rep;
}

} // namespace mpiga
