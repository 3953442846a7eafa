/** @file pde.hpp

    @brief Biharmonic and plate forms on planar multipatches: stiffness, mass,
    weak interface and boundary terms, the manufactured problem and error
    norms.

    Assembly routines work on the merged numbering of an ExtractionMap (see
    smoothspace.hpp); `project` takes the sum of all contributions to the
    global coefficient space.
*/

#pragma once

#include "mpiga/smoothspace.hpp"

#include <functional>

namespace mpiga {

/// Triplet buffer that is compressed into the running sum every `chunk`
/// entries, which bounds memory for large element loops.
class TripletAccumulator
{
public:
    TripletAccumulator(Index rows, Index cols, std::size_t chunk = std::size_t(1) << 22);

    void add(Index i, Index j, double v) { push(i, j, v); }
    void add_block(const std::vector<Index>& rows, const std::vector<Index>& cols, const Eigen::MatrixXd& m);
    SparseMatrix finish();

private:
    void push(Index i, Index j, double v)
    {
        m_buf.emplace_back(i, j, v);
        if (m_buf.size() >= m_chunk)
            flush();
    }
    void flush();

    SparseMatrix m_sum;
    std::vector<Triplet> m_buf;
    std::size_t m_chunk;
};

SparseMatrix project(const ExtractionMap& map, const SparseMatrix& merged);
Eigen::VectorXd project(const ExtractionMap& map, const Eigen::VectorXd& merged);

using ScalarField = std::function<double(double x, double y)>;
/// Normal-derivative data g_n(x, n) on the boundary.
using NormalField = std::function<double(const Eigen::Vector2d& x, const Eigen::Vector2d& n)>;

struct SystemMatrices
{
    SparseMatrix K;
    SparseMatrix M; ///< empty unless assembled
    Eigen::VectorXd f;
};

/// Mean of the four edge chord lengths of the element [u0,u1]x[v0,v1].
double element_size(const Patch& patch, double u0, double u1, double v0, double v1);

/// K_ij = scale * int lap(phi_i) lap(phi_j), f_i = int rhs phi_i (merged numbering).
SystemMatrices assemble_biharmonic(const MultiPatch& mp, const ExtractionMap& map, const ScalarField& rhs,
                                   double scale = 1.0);

/// M_ij = density_scale * int phi_i phi_j (merged numbering).
SparseMatrix assemble_mass(const MultiPatch& mp, const ExtractionMap& map, double density_scale = 1.0);

/// Symmetric Nitsche terms for the normal-derivative jump of a C0 space.
SparseMatrix nitsche_interface_terms(const MultiPatch& mp, const ExtractionMap& map, double alpha, double scale = 1.0);

struct BoundaryTerms
{
    SparseMatrix K;
    Eigen::VectorXd f;
};

/// Symmetric Nitsche imposition of u = g and du/dn = g_n on every boundary side.
BoundaryTerms nitsche_boundary_terms(const MultiPatch& mp, const ExtractionMap& map, double alpha1, double alpha2,
                                     const ScalarField& g, const NormalField& gn);

/// (alpha/h) int [u][v] + (alpha/h) int [du/dn][dv/dn] over every interface.
SparseMatrix penalty_interface_terms(const MultiPatch& mp, const ExtractionMap& map, double alpha, double scale = 1.0);

/// phi(x,y) = (cos 4 pi x - 1)(cos 4 pi y - 1) on the unit square.
struct ManufacturedBiharmonic
{
    /// d^(a+b) phi / dx^a dy^b for a, b <= 4.
    static double derivative(int a, int b, double x, double y);
    static double value(double x, double y) { return derivative(0, 0, x, y); }
    static double rhs(double x, double y);
    /// Derivatives up to order 2 in deriv_slot order.
    static Eigen::Matrix<double, 6, 1> jet(double x, double y);
};

struct NormReport
{
    double L2 = 0.0;
    double H1 = 0.0; ///< sqrt(L2^2 + |grad e|^2)
    double H2 = 0.0; ///< sqrt(H1^2 + |Hess e|_F^2)
};

using ExactJet = std::function<Eigen::Matrix<double, 6, 1>(double x, double y)>;

/// Errors of the discrete solution (global coefficients) against `exact`,
/// (p+2)^2 Gauss points per element.
NormReport error_norms(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs,
                       const ExactJet& exact);

} // namespace mpiga
