/** @file splines.cpp

    @brief B-spline evaluation, knot insertion and degree elevation.
*/

#include "mpiga/splines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mpiga {

namespace {

constexpr double kParamTol = 1e-12;

} // namespace

BasisSpec1D::BasisSpec1D(int degree, std::vector<double> knots)
    : m_degree(degree), m_knots(std::move(knots))
{
    if (m_degree < 1)
        throw SplineError("B-spline degree must be at least 1");
    const auto nk = static_cast<Index>(m_knots.size());
    if (nk < 2 * (m_degree + 1))
        throw SplineError("knot vector too short for the degree");
    if (!std::is_sorted(m_knots.begin(), m_knots.end()))
        throw SplineError("knot vector must be nondecreasing");
    if (!(m_knots.front() < m_knots.back()))
        throw SplineError("knot vector spans an empty interval");
    for (int i = 0; i <= m_degree; ++i)
    {
        if (m_knots[i] != m_knots.front() || m_knots[nk - 1 - i] != m_knots.back())
            throw SplineError("knot vector must be clamped (end knots repeated p+1 times)");
    }
    if (m_knots[m_degree + 1] == m_knots.front() || m_knots[nk - m_degree - 2] == m_knots.back())
        throw SplineError("end knot multiplicity exceeds p+1");

    // interior multiplicities
    Index i = m_degree + 1;
    while (i < nk - m_degree - 1)
    {
        Index j = i;
        while (j + 1 < nk && m_knots[j + 1] == m_knots[i])
            ++j;
        if (j - i + 1 > m_degree)
        {
            std::ostringstream os;
            os << "interior knot " << m_knots[i] << " has multiplicity " << (j - i + 1)
               << " > degree " << m_degree;
            throw SplineError(os.str());
        }
        i = j + 1;
    }
}

BasisSpec1D BasisSpec1D::uniform(int degree, int elements, int regularity)
{
    if (elements < 1)
        throw SplineError("need at least one element");
    if (regularity < 0 || regularity > degree - 1)
        throw SplineError("regularity must satisfy 0 <= r <= p-1");
    std::vector<double> knots(degree + 1, 0.0);
    for (int e = 1; e < elements; ++e)
        knots.insert(knots.end(), degree - regularity, static_cast<double>(e) / elements);
    knots.insert(knots.end(), degree + 1, 1.0);
    return BasisSpec1D(degree, std::move(knots));
}

std::vector<double> BasisSpec1D::breaks() const
{
    std::vector<double> b;
    for (double k : m_knots)
        if (b.empty() || k != b.back())
            b.push_back(k);
    return b;
}

int BasisSpec1D::regularity() const
{
    int reg = m_degree - 1;
    const auto nk = static_cast<Index>(m_knots.size());
    Index i = m_degree + 1;
    while (i < nk - m_degree - 1)
    {
        Index j = i;
        while (m_knots[j + 1] == m_knots[i])
            ++j;
        reg = std::min(reg, m_degree - static_cast<int>(j - i + 1));
        i = j + 1;
    }
    return reg;
}

Index find_span(const BasisSpec1D& spec, double t)
{
    const auto& k = spec.knots();
    const double scale = std::max(1.0, std::abs(spec.last() - spec.first()));
    if (!(t >= spec.first() - kParamTol * scale && t <= spec.last() + kParamTol * scale))
    {
        std::ostringstream os;
        os << "parameter " << t << " outside knot range [" << spec.first() << ", " << spec.last() << "]";
        throw SplineError(os.str());
    }
    const Index n = spec.size();
    if (t >= spec.last())
        return n - 1;
    if (t <= spec.first())
        return spec.degree();
    const auto it = std::upper_bound(k.begin(), k.end(), t);
    return std::min<Index>(static_cast<Index>(it - k.begin()) - 1, n - 1);
}

BasisEval eval_basis(const BasisSpec1D& spec, double t, int max_deriv)
{
    if (max_deriv < 0 || max_deriv > 3)
        throw SplineError("derivative order must be in 0..3");
    const int p = spec.degree();
    const auto& U = spec.knots();
    const Index span = find_span(spec, t);
    t = std::clamp(t, spec.first(), spec.last());

    // triangular table of basis values (upper) and knot differences (lower)
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j)
    {
        left[j] = t - U[span + 1 - j];
        right[j] = U[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r)
        {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double tmp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        ndu(j, j) = saved;
    }

    BasisEval out{span, Eigen::MatrixXd::Zero(max_deriv + 1, p + 1)};
    for (int j = 0; j <= p; ++j)
        out.values(0, j) = ndu(j, p);

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r)
    {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= std::min(max_deriv, p); ++k)
        {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k)
            {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j)
            {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk)
            {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            out.values(k, r) = d;
            std::swap(s1, s2);
        }
    }
    int factor = p;
    for (int k = 1; k <= std::min(max_deriv, p); ++k)
    {
        out.values.row(k) *= factor;
        factor *= (p - k);
    }
    return out;
}

std::vector<double> greville_points(const BasisSpec1D& spec)
{
    const int p = spec.degree();
    const auto& U = spec.knots();
    std::vector<double> g(spec.size());
    for (Index i = 0; i < spec.size(); ++i)
    {
        double s = 0.0;
        for (int k = 1; k <= p; ++k)
            s += U[i + k];
        g[i] = s / p;
    }
    return g;
}

Eigen::MatrixXd collocation_matrix(const BasisSpec1D& spec, const std::vector<double>& points)
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Index>(points.size()), spec.size());
    for (Index i = 0; i < static_cast<Index>(points.size()); ++i)
    {
        const BasisEval be = eval_basis(spec, points[i], 0);
        const Index first = be.firstIndex(spec.degree());
        for (int j = 0; j <= spec.degree(); ++j)
            A(i, first + j) = be.values(0, j);
    }
    return A;
}

Eigen::MatrixXd eval_spline(const BasisSpec1D& spec, const Eigen::MatrixXd& coeffs,
                            const std::vector<double>& points, int deriv)
{
    if (coeffs.rows() != spec.size())
        throw SplineError("coefficient count does not match basis dimension");
    Eigen::MatrixXd out(static_cast<Index>(points.size()), coeffs.cols());
    for (Index i = 0; i < static_cast<Index>(points.size()); ++i)
    {
        const BasisEval be = eval_basis(spec, points[i], deriv);
        const Index first = be.firstIndex(spec.degree());
        out.row(i) = be.values.row(deriv) * coeffs.middleRows(first, spec.degree() + 1);
    }
    return out;
}

std::pair<BasisSpec1D, Eigen::MatrixXd> insert_knots(const BasisSpec1D& spec,
                                                     const Eigen::MatrixXd& coeffs,
                                                     const std::vector<double>& new_knots)
{
    if (coeffs.rows() != spec.size())
        throw SplineError("coefficient count does not match basis dimension");
    const int p = spec.degree();
    std::vector<double> U = spec.knots();
    Eigen::MatrixXd P = coeffs;
    for (double t : new_knots)
    {
        if (!(t > U.front() && t < U.back()))
            throw SplineError("inserted knot must lie strictly inside the knot range");
        const Index k = static_cast<Index>(std::upper_bound(U.begin(), U.end(), t) - U.begin()) - 1;
        Eigen::MatrixXd Q(P.rows() + 1, P.cols());
        Q.topRows(k - p + 1) = P.topRows(k - p + 1);
        for (Index i = k - p + 1; i <= k; ++i)
        {
            const double alpha = (t - U[i]) / (U[i + p] - U[i]);
            Q.row(i) = alpha * P.row(i) + (1.0 - alpha) * P.row(i - 1);
        }
        Q.bottomRows(P.rows() - k) = P.bottomRows(P.rows() - k);
        U.insert(U.begin() + k + 1, t);
        P = std::move(Q);
    }
    return {BasisSpec1D(p, std::move(U)), std::move(P)};
}

std::pair<BasisSpec1D, Eigen::MatrixXd> refine_uniform(const BasisSpec1D& spec,
                                                       const Eigen::MatrixXd& coeffs,
                                                       int multiplicity)
{
    if (multiplicity < 1 || multiplicity > spec.degree())
        throw SplineError("midpoint multiplicity must be in 1..p");
    const std::vector<double> b = spec.breaks();
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        mids.insert(mids.end(), multiplicity, 0.5 * (b[i] + b[i + 1]));
    return insert_knots(spec, coeffs, mids);
}

std::pair<BasisSpec1D, Eigen::MatrixXd> elevate_degree(const BasisSpec1D& spec,
                                                       const Eigen::MatrixXd& coeffs)
{
    if (coeffs.rows() != spec.size())
        throw SplineError("coefficient count does not match basis dimension");
    std::vector<double> U;
    const auto& old = spec.knots();
    for (std::size_t i = 0; i < old.size(); ++i)
    {
        U.push_back(old[i]);
        if (i + 1 == old.size() || old[i + 1] != old[i])
            U.push_back(old[i]);
    }
    BasisSpec1D elevated(spec.degree() + 1, std::move(U));

    // the old function lies in the new space, so interpolation at the new
    // Greville points reproduces it exactly
    const std::vector<double> g = greville_points(elevated);
    const Eigen::MatrixXd A = collocation_matrix(elevated, g);
    const Eigen::MatrixXd rhs = eval_spline(spec, coeffs, g);
    Eigen::MatrixXd c = A.partialPivLu().solve(rhs);
    return {std::move(elevated), std::move(c)};
}

Eigen::MatrixXd transfer_matrix(const BasisSpec1D& from, const BasisSpec1D& to)
{
    if (to.degree() < from.degree())
        throw SplineError("target basis has lower degree");
    BasisSpec1D cur = from;
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(from.size(), from.size());
    while (cur.degree() < to.degree())
    {
        auto [s, c] = elevate_degree(cur, T);
        cur = std::move(s);
        T = std::move(c);
    }
    // knots of `to` missing from `cur`, counted with multiplicity
    std::vector<double> missing;
    const auto& a = cur.knots();
    const auto& b = to.knots();
    std::size_t i = 0;
    for (double k : b)
    {
        if (i < a.size() && a[i] == k)
            ++i;
        else
            missing.push_back(k);
    }
    if (i != a.size())
        throw SplineError("target basis does not contain the source basis");
    if (!missing.empty())
    {
        auto [s, c] = insert_knots(cur, T, missing);
        if (!(s == to))
            throw SplineError("target basis does not contain the source basis");
        T = std::move(c);
    }
    return T;
}

TensorBasisEval eval_tensor_basis(const TensorBasisSpec& spec, double u, double v, int order)
{
    const BasisEval bu = eval_basis(spec.u, u, order);
    const BasisEval bv = eval_basis(spec.v, v, order);
    const int pu = spec.u.degree(), pv = spec.v.degree();
    const Index fu = bu.firstIndex(pu), fv = bv.firstIndex(pv);

    TensorBasisEval out;
    const int nf = (pu + 1) * (pv + 1);
    out.indices.resize(nf);
    out.values.resize(num_deriv_slots(order), nf);
    for (int jv = 0; jv <= pv; ++jv)
        for (int iu = 0; iu <= pu; ++iu)
        {
            const int col = iu + (pu + 1) * jv;
            out.indices[col] = spec.index(fu + iu, fv + jv);
            for (int k = 0; k <= order; ++k)
                for (int b = 0; b <= k; ++b)
                    out.values(deriv_slot(k - b, b), col) = bu.values(k - b, iu) * bv.values(b, jv);
        }
    return out;
}

} // namespace mpiga
