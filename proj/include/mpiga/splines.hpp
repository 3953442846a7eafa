/** @file splines.hpp

    @brief Univariate and tensor-product B-spline bases on clamped knot vectors.

    Coefficient blocks are passed as matrices with one row per basis
    function, so vector-valued data (control points) and scalar fields go
    through the same routines.
*/

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>
#include <vector>

namespace mpiga {

using Index = Eigen::Index;

/// Raised for invalid knot vectors, out-of-range parameters and similar
/// misuse of the spline routines.
class SplineError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Clamped B-spline basis of degree p on a nondecreasing knot vector.
class BasisSpec1D
{
public:
    BasisSpec1D(int degree, std::vector<double> knots);

    /// Clamped basis on [0,1] with `elements` uniform spans and interior knots
    /// repeated p - regularity times.
    static BasisSpec1D uniform(int degree, int elements, int regularity);

    int degree() const { return m_degree; }
    const std::vector<double>& knots() const { return m_knots; }
    Index size() const { return static_cast<Index>(m_knots.size()) - m_degree - 1; }

    double first() const { return m_knots.front(); }
    double last() const { return m_knots.back(); }

    /// Distinct knot values (element boundaries).
    std::vector<double> breaks() const;
    Index numElements() const { return static_cast<Index>(breaks().size()) - 1; }

    /// Smallest p - m over interior knots; p - 1 when there are none.
    int regularity() const;

    bool operator==(const BasisSpec1D&) const = default;

private:
    int m_degree;
    std::vector<double> m_knots;
};

/// Nonzero basis functions at one parameter: functions span-p .. span.
struct BasisEval
{
    Index span;
    Eigen::MatrixXd values; ///< (max_deriv+1) x (p+1), row k holds k-th derivatives

    Index firstIndex(int degree) const { return span - degree; }
};

Index find_span(const BasisSpec1D& spec, double t);

BasisEval eval_basis(const BasisSpec1D& spec, double t, int max_deriv);

std::vector<double> greville_points(const BasisSpec1D& spec);

/// Dense collocation matrix A(i,j) = N_j(points[i]).
Eigen::MatrixXd collocation_matrix(const BasisSpec1D& spec, const std::vector<double>& points);

/// Values of the spline with the given coefficients (rows = basis functions).
Eigen::MatrixXd eval_spline(const BasisSpec1D& spec, const Eigen::MatrixXd& coeffs,
                            const std::vector<double>& points, int deriv = 0);

/// Boehm knot insertion of every value in `new_knots` (sorted, repeats allowed).
std::pair<BasisSpec1D, Eigen::MatrixXd> insert_knots(const BasisSpec1D& spec,
                                                     const Eigen::MatrixXd& coeffs,
                                                     const std::vector<double>& new_knots);

/// Bisects every nonempty span. `multiplicity` copies of each midpoint are
/// inserted (1 keeps the current regularity at the new knots at p-1).
std::pair<BasisSpec1D, Eigen::MatrixXd> refine_uniform(const BasisSpec1D& spec,
                                                       const Eigen::MatrixXd& coeffs,
                                                       int multiplicity = 1);

/// Raises the degree by one; every distinct knot gains one multiplicity.
std::pair<BasisSpec1D, Eigen::MatrixXd> elevate_degree(const BasisSpec1D& spec,
                                                       const Eigen::MatrixXd& coeffs);

/// Matrix T with new_coeffs = T * old_coeffs for the given refinement.
Eigen::MatrixXd transfer_matrix(const BasisSpec1D& from, const BasisSpec1D& to);

// ---------------------------------------------------------------------------

/// Derivative slot for d^(a+b) / du^a dv^b, ordered by total order:
/// (0,0) | (1,0) (0,1) | (2,0) (1,1) (0,2) | (3,0) (2,1) (1,2) (0,3)
constexpr int deriv_slot(int a, int b)
{
    const int k = a + b;
    return k * (k + 1) / 2 + b;
}
constexpr int num_deriv_slots(int order) { return (order + 1) * (order + 2) / 2; }

struct TensorBasisSpec
{
    BasisSpec1D u;
    BasisSpec1D v;

    Index size() const { return u.size() * v.size(); }
    Index index(Index i, Index j) const { return i + u.size() * j; }
    bool operator==(const TensorBasisSpec&) const = default;
};

/// Nonzero tensor basis functions at (u,v) and their parametric derivatives.
struct TensorBasisEval
{
    std::vector<Index> indices;  ///< patch-local function indices
    Eigen::MatrixXd values;      ///< num_deriv_slots(order) x indices.size()
};

TensorBasisEval eval_tensor_basis(const TensorBasisSpec& spec, double u, double v, int order);

} // namespace mpiga
