/** @file quadrature.cpp

    @brief Gauss-Legendre rules and the inverse chain rule up to third order.
*/

#include "mpiga/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace mpiga {

namespace {

GaussRule compute_gauss(int n)
{
    GaussRule r;
    r.points.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i)
    {
        // Newton on P_n from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1)
                p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        r.points[n - 1 - i] = 0.5 * (x + 1.0);
        r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

inline int slot_of(int i) { return i == 0 ? deriv_slot(1, 0) : deriv_slot(0, 1); }
inline int slot_of(int i, int j) { return deriv_slot(2 - i - j, i + j); }
inline int slot_of(int i, int j, int m) { return deriv_slot(3 - i - j - m, i + j + m); }

} // namespace

const GaussRule& gauss_rule(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_rule: need at least one point");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_gauss(n)).first;
    return it->second;
}

ElementQuad element_quadrature(double u0, double u1, double v0, double v1, int n)
{
    const GaussRule& g = gauss_rule(n);
    ElementQuad q;
    const double area = (u1 - u0) * (v1 - v0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
        {
            q.uv.push_back({u0 + (u1 - u0) * g.points[i], v0 + (v1 - v0) * g.points[j]});
            q.w.push_back(area * g.weights[i] * g.weights[j]);
        }
    return q;
}

Eigen::MatrixXd to_physical(const Eigen::MatrixXd& param, const Eigen::MatrixXd& geo, int order)
{
    Eigen::Matrix2d J;
    J << geo(0, 1), geo(0, 2), geo(1, 1), geo(1, 2);
    const double det = J.determinant();
    if (!(std::abs(det) > 0.0))
        throw GeometryError("singular geometry Jacobian");
    const Eigen::Matrix2d Ji = J.inverse();
    const Index nf = param.cols();
    Eigen::MatrixXd out(num_deriv_slots(order), nf);

    double G2[2][2][2] = {}, G3[2][2][2][2] = {};
    if (order >= 2)
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                {
                    G2[k][i][j] = geo(k, slot_of(i, j));
                    if (order >= 3)
                        for (int m = 0; m < 2; ++m)
                            G3[k][i][j][m] = geo(k, slot_of(i, j, m));
                }

    for (Index f = 0; f < nf; ++f)
    {
        out(0, f) = param(0, f);
        if (order < 1)
            continue;
        double N1[2];
        for (int k = 0; k < 2; ++k)
            N1[k] = Ji(0, k) * param(slot_of(0), f) + Ji(1, k) * param(slot_of(1), f);
        out(deriv_slot(1, 0), f) = N1[0];
        out(deriv_slot(0, 1), f) = N1[1];
        if (order < 2)
            continue;

        double t2[2][2], N2[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                t2[i][j] = param(slot_of(i, j), f) - G2[0][i][j] * N1[0] - G2[1][i][j] * N1[1];
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
            {
                double s = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        s += Ji(i, k) * Ji(j, l) * t2[i][j];
                N2[k][l] = s;
            }
        out(deriv_slot(2, 0), f) = N2[0][0];
        out(deriv_slot(1, 1), f) = 0.5 * (N2[0][1] + N2[1][0]);
        out(deriv_slot(0, 2), f) = N2[1][1];
        if (order < 3)
            continue;

        double t3[2][2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int m = 0; m < 2; ++m)
                {
                    double s = param(slot_of(i, j, m), f);
                    for (int k = 0; k < 2; ++k)
                    {
                        s -= G3[k][i][j][m] * N1[k];
                        for (int l = 0; l < 2; ++l)
                            s -= (G2[k][i][m] * J(l, j) + J(k, i) * G2[l][j][m] + G2[k][i][j] * J(l, m)) * N2[k][l];
                    }
                    t3[i][j][m] = s;
                }
        auto N3 = [&](int k, int l, int q) {
            double s = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int m = 0; m < 2; ++m)
                        s += Ji(i, k) * Ji(j, l) * Ji(m, q) * t3[i][j][m];
            return s;
        };
        out(deriv_slot(3, 0), f) = N3(0, 0, 0);
        out(deriv_slot(2, 1), f) = N3(0, 0, 1);
        out(deriv_slot(1, 2), f) = N3(0, 1, 1);
        out(deriv_slot(0, 3), f) = N3(1, 1, 1);
    }
    return out;
}

PhysicalEval physical_basis(const Patch& patch, double u, double v, int order)
{
    const TensorBasisEval tb = eval_tensor_basis(patch.basis, u, v, std::max(order, 1));
    Eigen::MatrixXd geo = Eigen::MatrixXd::Zero(2, tb.values.rows());
    for (std::size_t k = 0; k < tb.indices.size(); ++k)
        geo.noalias() += patch.control_points.row(tb.indices[k]).head(2).transpose() *
                         tb.values.col(static_cast<Index>(k)).transpose();
    PhysicalEval pe;
    pe.indices = tb.indices;
    pe.point = geo.col(0);
    pe.jacobian << geo(0, 1), geo(0, 2), geo(1, 1), geo(1, 2);
    pe.det = pe.jacobian.determinant();
    if (!(std::abs(pe.det) > 1e-14 * std::max(1.0, pe.jacobian.squaredNorm())))
        throw GeometryError("singular geometry Jacobian");
    pe.values = to_physical(tb.values.topRows(num_deriv_slots(order)), geo, order);
    return pe;
}

} // namespace mpiga
