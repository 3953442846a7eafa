/** @file pde.cpp

    @brief Biharmonic/plate assembly, Nitsche and penalty terms, norms.
*/

#include "mpiga/pde.hpp"
#include "mpiga/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace mpiga {

TripletAccumulator::TripletAccumulator(Index rows, Index cols, std::size_t chunk)
    : m_sum(rows, cols), m_chunk(std::max<std::size_t>(chunk, 1024))
{
    m_buf.reserve(std::min<std::size_t>(m_chunk, std::size_t(1) << 20));
}

void TripletAccumulator::add_block(const std::vector<Index>& rows, const std::vector<Index>& cols,
                                   const Eigen::MatrixXd& m)
{
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows.size(); ++i)
            push(rows[i], cols[j], m(static_cast<Index>(i), static_cast<Index>(j)));
}

void TripletAccumulator::flush()
{
    if (m_buf.empty())
        return;
    SparseMatrix tmp(m_sum.rows(), m_sum.cols());
    tmp.setFromTriplets(m_buf.begin(), m_buf.end());
    if (m_sum.nonZeros() == 0)
        m_sum = std::move(tmp);
    else
        m_sum += tmp;
    m_buf.clear();
}

SparseMatrix TripletAccumulator::finish()
{
    flush();
    m_sum.makeCompressed();
    return std::move(m_sum);
}

SparseMatrix project(const ExtractionMap& map, const SparseMatrix& merged)
{
    const SparseMatrix& z = map.reduce;
    SparseMatrix kz = merged * z;
    SparseMatrix out = SparseMatrix(z.transpose()) * kz;
    out.makeCompressed();
    return out;
}

Eigen::VectorXd project(const ExtractionMap& map, const Eigen::VectorXd& merged)
{
    return map.reduce.transpose() * merged;
}

double element_size(const Patch& patch, double u0, double u1, double v0, double v1)
{
    const Eigen::VectorXd a = eval_geometry(patch, u0, v0, 0).point();
    const Eigen::VectorXd b = eval_geometry(patch, u1, v0, 0).point();
    const Eigen::VectorXd c = eval_geometry(patch, u1, v1, 0).point();
    const Eigen::VectorXd d = eval_geometry(patch, u0, v1, 0).point();
    return 0.25 * ((b - a).norm() + (c - b).norm() + (d - c).norm() + (a - d).norm());
}

namespace {

int quad_points(const Patch& p, int extra)
{
    return std::max(p.basis.u.degree(), p.basis.v.degree()) + extra;
}

std::vector<Index> merged_indices(const ExtractionMap& map, int patch, const std::vector<Index>& local)
{
    std::vector<Index> out(local.size());
    for (std::size_t k = 0; k < local.size(); ++k)
        out[k] = map.merged_index(patch, local[k]);
    return out;
}

template <class Fn>
void for_each_element(const Patch& p, Fn fn)
{
    const auto bu = p.basis.u.breaks(), bv = p.basis.v.breaks();
    for (std::size_t j = 0; j + 1 < bv.size(); ++j)
        for (std::size_t i = 0; i + 1 < bu.size(); ++i)
            fn(bu[i], bu[i + 1], bv[j], bv[j + 1]);
}

/// Parameter box of the element touching side s along the span [t0, t1].
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

/// Basis traces on a side point: value, normal derivative, Laplacian and
/// normal derivative of the Laplacian (the last only for order 3).
struct SideTrace
{
    std::vector<Index> idx; ///< merged
    Eigen::VectorXd val, dn, lap, dnlap;
    Eigen::Vector2d x, normal;
    double ds = 0.0;
};

SideTrace side_trace(const MultiPatch& mp, const ExtractionMap& map, int patch, Side s, double t, int order,
                     const Eigen::Vector2d* normal)
{
    const Patch& p = mp.patches[patch];
    const auto uv = side_point(s, t);
    const PhysicalEval e = physical_basis(p, uv[0], uv[1], order);
    SideTrace tr;
    tr.idx = merged_indices(map, patch, e.indices);
    tr.x = e.point;
    const Eigen::Vector2d tau = e.jacobian.col(side_direction(s));
    tr.ds = tau.norm();
    if (normal)
        tr.normal = *normal;
    else
    {
        Eigen::Vector2d n(tau(1), -tau(0));
        const auto pn = side_param_normal(s);
        if (n.dot(e.jacobian * Eigen::Vector2d(pn[0], pn[1])) < 0.0)
            n = -n;
        tr.normal = n.normalized();
    }
    const Eigen::Vector2d& n = tr.normal;
    tr.val = e.values.row(0).transpose();
    tr.dn = n(0) * e.values.row(deriv_slot(1, 0)).transpose() + n(1) * e.values.row(deriv_slot(0, 1)).transpose();
    if (order >= 2)
        tr.lap = (e.values.row(deriv_slot(2, 0)) + e.values.row(deriv_slot(0, 2))).transpose();
    if (order >= 3)
        tr.dnlap = n(0) * (e.values.row(deriv_slot(3, 0)) + e.values.row(deriv_slot(1, 2))).transpose() +
                   n(1) * (e.values.row(deriv_slot(2, 1)) + e.values.row(deriv_slot(0, 3))).transpose();
    return tr;
}

void check_scalar(const ExtractionMap& map)
{
    if (map.components != 1)
        throw CouplingError("scalar problem needs a scalar extraction map");
}

/// Calls fn(trace_a, trace_b, weight, h) at Gauss points of every interface.
template <class Fn>
void for_each_interface_point(const MultiPatch& mp, const ExtractionMap& map, int order, Fn fn)
{
    for (const Interface& itf : mp.interfaces)
    {
        const Patch& pa = mp.patches[itf.patch_a];
        const Patch& pb = mp.patches[itf.patch_b];
        const std::vector<double> br = pa.side_basis(itf.side_a).breaks();
        const GaussRule& g = gauss_rule(quad_points(pa, 2));
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
                const SideTrace a = side_trace(mp, map, itf.patch_a, itf.side_a, t, order, nullptr);
                const SideTrace b =
                    side_trace(mp, map, itf.patch_b, itf.side_b, itf.reversed ? 1.0 - t : t, order, &a.normal);
                fn(a, b, (t1 - t0) * g.weights[q] * a.ds, h);
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

Eigen::VectorXd stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sb)
{
    Eigen::VectorXd out(a.size() + b.size());
    out << a, sb * b;
    return out;
}

} // namespace

SystemMatrices assemble_biharmonic(const MultiPatch& mp, const ExtractionMap& map, const ScalarField& rhs,
                                   double scale)
{
    check_scalar(map);
    TripletAccumulator acc(map.n_merged, map.n_merged);
    SystemMatrices sys;
    sys.f = Eigen::VectorXd::Zero(map.n_merged);
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Patch& p = mp.patches[k];
        const int nq = quad_points(p, 1);
        for_each_element(p, [&](double u0, double u1, double v0, double v1) {
            const ElementQuad eq = element_quadrature(u0, u1, v0, v1, nq);
            Eigen::MatrixXd ke;
            Eigen::VectorXd fe;
            std::vector<Index> idx;
            for (std::size_t q = 0; q < eq.uv.size(); ++q)
            {
                const PhysicalEval e = physical_basis(p, eq.uv[q][0], eq.uv[q][1], 2);
                const double w = eq.w[q] * std::abs(e.det);
                const Eigen::VectorXd lap =
                    (e.values.row(deriv_slot(2, 0)) + e.values.row(deriv_slot(0, 2))).transpose();
                if (q == 0)
                {
                    idx = merged_indices(map, k, e.indices);
                    ke = Eigen::MatrixXd::Zero(lap.size(), lap.size());
                    fe = Eigen::VectorXd::Zero(lap.size());
                }
                ke.noalias() += (scale * w) * lap * lap.transpose();
                if (rhs)
                    fe.noalias() += (w * rhs(e.point(0), e.point(1))) * e.values.row(0).transpose();
            }
            acc.add_block(idx, idx, ke);
            for (std::size_t i = 0; i < idx.size(); ++i)
                sys.f(idx[i]) += fe(static_cast<Index>(i));
        });
    }
    sys.K = acc.finish();
    return sys;
}

SparseMatrix assemble_mass(const MultiPatch& mp, const ExtractionMap& map, double density_scale)
{
    check_scalar(map);
    TripletAccumulator acc(map.n_merged, map.n_merged);
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Patch& p = mp.patches[k];
        const int nq = quad_points(p, 1);
        for_each_element(p, [&](double u0, double u1, double v0, double v1) {
            const ElementQuad eq = element_quadrature(u0, u1, v0, v1, nq);
            Eigen::MatrixXd me;
            std::vector<Index> idx;
            for (std::size_t q = 0; q < eq.uv.size(); ++q)
            {
                const PhysicalEval e = physical_basis(p, eq.uv[q][0], eq.uv[q][1], 0);
                const Eigen::VectorXd n = e.values.row(0).transpose();
                if (q == 0)
                {
                    idx = merged_indices(map, k, e.indices);
                    me = Eigen::MatrixXd::Zero(n.size(), n.size());
                }
                me.noalias() += (density_scale * eq.w[q] * std::abs(e.det)) * n * n.transpose();
            }
            acc.add_block(idx, idx, me);
        });
    }
    return acc.finish();
}

SparseMatrix nitsche_interface_terms(const MultiPatch& mp, const ExtractionMap& map, double alpha, double scale)
{
    check_scalar(map);
    if (!(alpha > 0.0))
        throw std::invalid_argument("Nitsche parameter must be positive");
    TripletAccumulator acc(map.n_merged, map.n_merged);
    for_each_interface_point(mp, map, 2, [&](const SideTrace& a, const SideTrace& b, double w, double h) {
        const std::vector<Index> idx = concat(a.idx, b.idx);
        const Eigen::VectorXd jdn = stack(a.dn, b.dn, -1.0);
        const Eigen::VectorXd avg = 0.5 * stack(a.lap, b.lap, 1.0);
        const Eigen::MatrixXd m = (scale * w) * (-(avg * jdn.transpose() + jdn * avg.transpose()) +
                                                 (alpha / h) * jdn * jdn.transpose());
        acc.add_block(idx, idx, m);
    });
    return acc.finish();
}

SparseMatrix penalty_interface_terms(const MultiPatch& mp, const ExtractionMap& map, double alpha, double scale)
{
    check_scalar(map);
    if (!(alpha > 0.0))
        throw std::invalid_argument("penalty parameter must be positive");
    TripletAccumulator acc(map.n_merged, map.n_merged);
    for_each_interface_point(mp, map, 1, [&](const SideTrace& a, const SideTrace& b, double w, double h) {
        const std::vector<Index> idx = concat(a.idx, b.idx);
        const Eigen::VectorXd jv = stack(a.val, b.val, -1.0);
        const Eigen::VectorXd jdn = stack(a.dn, b.dn, -1.0);
        const Eigen::MatrixXd m = (scale * w * alpha / h) * (jv * jv.transpose() + jdn * jdn.transpose());
        acc.add_block(idx, idx, m);
    });
    return acc.finish();
}

BoundaryTerms nitsche_boundary_terms(const MultiPatch& mp, const ExtractionMap& map, double alpha1, double alpha2,
                                     const ScalarField& g, const NormalField& gn)
{
    check_scalar(map);
    if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
        throw std::invalid_argument("Nitsche parameters must be positive");
    TripletAccumulator acc(map.n_merged, map.n_merged);
    BoundaryTerms bt;
    bt.f = Eigen::VectorXd::Zero(map.n_merged);
    for (const BoundarySide& bs : mp.boundaries)
    {
        const Patch& p = mp.patches[bs.patch];
        const std::vector<double> br = p.side_basis(bs.side).breaks();
        const GaussRule& gr = gauss_rule(quad_points(p, 2));
        for (std::size_t e = 0; e + 1 < br.size(); ++e)
        {
            const double t0 = br[e], t1 = br[e + 1];
            const auto el = side_element(p, bs.side, t0, t1);
            const double h = element_size(p, el[0], el[1], el[2], el[3]);
            const double c1 = alpha1 / h, c2 = alpha2 / (h * h * h);
            for (std::size_t q = 0; q < gr.points.size(); ++q)
            {
                const double t = t0 + (t1 - t0) * gr.points[q];
                const SideTrace tr = side_trace(mp, map, bs.patch, bs.side, t, 3, nullptr);
                const double w = (t1 - t0) * gr.weights[q] * tr.ds;
                const Eigen::MatrixXd m =
                    w * (tr.dnlap * tr.val.transpose() + tr.val * tr.dnlap.transpose() -
                         tr.lap * tr.dn.transpose() - tr.dn * tr.lap.transpose() + c2 * tr.val * tr.val.transpose() +
                         c1 * tr.dn * tr.dn.transpose());
                acc.add_block(tr.idx, tr.idx, m);
                const double gv = g ? g(tr.x(0), tr.x(1)) : 0.0;
                const double gnv = gn ? gn(tr.x, tr.normal) : 0.0;
                if (gv == 0.0 && gnv == 0.0)
                    continue;
                const Eigen::VectorXd fe = w * (gv * (tr.dnlap + c2 * tr.val) + gnv * (c1 * tr.dn - tr.lap));
                for (std::size_t i = 0; i < tr.idx.size(); ++i)
                    bt.f(tr.idx[i]) += fe(static_cast<Index>(i));
            }
        }
    }
    bt.K = acc.finish();
    return bt;
}

double ManufacturedBiharmonic::derivative(int a, int b, double x, double y)
{
    constexpr double k = 4.0 * std::numbers::pi;
    auto d = [](int n, double t) {
        const double c = std::cos(k * t), s = std::sin(k * t);
        switch (n)
        {
        case 0: return c - 1.0;
        case 1: return -k * s;
        case 2: return -k * k * c;
        case 3: return k * k * k * s;
        case 4: return k * k * k * k * c;
        }
        throw std::invalid_argument("derivative order above 4");
    };
    return d(a, x) * d(b, y);
}

double ManufacturedBiharmonic::rhs(double x, double y)
{
    constexpr double pi = std::numbers::pi;
    const double cx = std::cos(4 * pi * x), cy = std::cos(4 * pi * y);
    return 256.0 * std::pow(pi, 4) * (4.0 * cx * cy - cx - cy);
}

Eigen::Matrix<double, 6, 1> ManufacturedBiharmonic::jet(double x, double y)
{
    Eigen::Matrix<double, 6, 1> j;
    for (int o = 0; o <= 2; ++o)
        for (int b = 0; b <= o; ++b)
            j(deriv_slot(o - b, b)) = derivative(o - b, b, x, y);
    return j;
}

NormReport error_norms(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs,
                       const ExactJet& exact)
{
    check_scalar(map);
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
    for (int k = 0; k < static_cast<int>(mp.patches.size()); ++k)
    {
        const Patch& p = mp.patches[k];
        const Eigen::VectorXd c = map.patch_coefficients(k, coeffs).col(0);
        const int nq = quad_points(p, 2);
        for_each_element(p, [&](double u0, double u1, double v0, double v1) {
            const ElementQuad eq = element_quadrature(u0, u1, v0, v1, nq);
            for (std::size_t q = 0; q < eq.uv.size(); ++q)
            {
                const PhysicalEval e = physical_basis(p, eq.uv[q][0], eq.uv[q][1], 2);
                Eigen::Matrix<double, 6, 1> uh = Eigen::Matrix<double, 6, 1>::Zero();
                for (std::size_t f = 0; f < e.indices.size(); ++f)
                    uh += c(e.indices[f]) * e.values.col(static_cast<Index>(f));
                const Eigen::Matrix<double, 6, 1> d = uh - exact(e.point(0), e.point(1));
                const double w = eq.w[q] * std::abs(e.det);
                e0 += w * d(0) * d(0);
                e1 += w * (d(1) * d(1) + d(2) * d(2));
                e2 += w * (d(3) * d(3) + 2.0 * d(4) * d(4) + d(5) * d(5));
            }
        });
    }
    NormReport r;
    r.L2 = std::sqrt(e0);
    r.H1 = std::sqrt(e0 + e1);
    r.H2 = std::sqrt(e0 + e1 + e2);
    return r;
}

} // namespace mpiga
