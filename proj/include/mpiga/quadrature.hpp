/** @file quadrature.hpp

    @brief Gauss-Legendre rules and physical derivatives of basis functions on
    planar (or planar-projected) patches.
*/

#pragma once

#include "mpiga/multipatch.hpp"

#include <vector>

namespace mpiga {

struct GaussRule
{
    std::vector<double> points;  ///< on [0,1]
    std::vector<double> weights; ///< sum to 1
};

/// n-point Gauss-Legendre rule on [0,1]; exact up to degree 2n-1.
const GaussRule& gauss_rule(int n);

/// Tensor quadrature points of one element [u0,u1]x[v0,v1].
struct ElementQuad
{
    std::vector<std::array<double, 2>> uv;
    std::vector<double> w; ///< parametric weights (include the element area)
};

ElementQuad element_quadrature(double u0, double u1, double v0, double v1, int n);

/// Physical derivatives d^(a+b)/dx^a dy^b of the nonzero basis functions at a
/// point, rows in deriv_slot order. Only the first two geometry coordinates
/// are used, so surface patches are treated through their planar projection.
struct PhysicalEval
{
    std::vector<Index> indices;
    Eigen::MatrixXd values;   ///< num_deriv_slots(order) x indices.size()
    Eigen::Vector2d point;
    Eigen::Matrix2d jacobian; ///< d(x,y)/d(u,v)
    double det = 0.0;
};

/// Throws GeometryError if the Jacobian is singular.
PhysicalEval physical_basis(const Patch& patch, double u, double v, int order);

/// Same transform applied to given parametric derivatives (rows in slot order,
/// one column per function), with geometry derivatives `geo` (2 x slots).
Eigen::MatrixXd to_physical(const Eigen::MatrixXd& param, const Eigen::MatrixXd& geo, int order);

} // namespace mpiga
