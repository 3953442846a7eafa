/** @file multipatch.hpp

    @brief Tensor-product patches, multi-patch topology and the benchmark domains.

    Side and corner numbering is fixed for the whole library:
    sides   0: u=0 (west), 1: u=1 (east), 2: v=0 (south), 3: v=1 (north);
    corners c = a + 2b for (u,v) = (a,b).
    A side is parameterized by v for sides 0/1 and by u for sides 2/3.
*/

#pragma once

#include "mpiga/splines.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace mpiga {

class GeometryError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Side : int { West = 0, East = 1, South = 2, North = 3 };

inline constexpr std::array<Side, 4> kAllSides{Side::West, Side::East, Side::South, Side::North};

/// Parametric point of a side at side parameter t.
std::array<double, 2> side_point(Side s, double t);
/// The two corners (start t=0, end t=1) of a side.
std::array<int, 2> side_corners(Side s);
/// Parametric direction running along the side (0 = u, 1 = v).
inline int side_direction(Side s) { return static_cast<int>(s) < 2 ? 1 : 0; }
/// Outward unit normal of the side in the parameter square.
std::array<double, 2> side_param_normal(Side s);

struct Patch
{
    TensorBasisSpec basis;
    Eigen::MatrixXd control_points; ///< basis.size() x dim, row index i + n_u * j

    int dim() const { return static_cast<int>(control_points.cols()); }

    /// Local indices of the functions whose trace on side s is nonzero, in
    /// increasing side parameter. `layer` 1 gives the next row inwards.
    std::vector<Index> side_indices(Side s, int layer = 0) const;
    const BasisSpec1D& side_basis(Side s) const;
    Eigen::VectorXd corner(int c) const;
};

/// Patch built from a bilinear map with corners (0,0), (1,0), (0,1), (1,1) in
/// parametric order c = a + 2b.
Patch make_bilinear_patch(const std::array<Eigen::VectorXd, 4>& corners);

/// Geometry derivatives at a parametric point: column deriv_slot(a,b) holds
/// d^(a+b) x / du^a dv^b.
struct GeometryEval
{
    Eigen::MatrixXd derivs; ///< dim x num_deriv_slots(order)

    Eigen::VectorXd point() const { return derivs.col(0); }
    /// dim x 2 matrix of first derivatives.
    Eigen::MatrixXd jacobian() const { return derivs.middleCols(1, 2); }
};

GeometryEval eval_geometry(const Patch& patch, double u, double v, int order);

/// Covariant surface frame of a 3D patch.
struct SurfaceFrame
{
    Eigen::Vector3d a1, a2, a3;
    Eigen::Matrix2d metric;     ///< a_ab
    Eigen::Matrix2d curvature;  ///< b_ab
    double jac_det;             ///< |a1 x a2|
    Eigen::Vector3d d11, d12, d22; ///< second derivatives of the position
};

SurfaceFrame surface_frame(const Patch& patch, double u, double v);
SurfaceFrame surface_frame(const GeometryEval& g);

struct Interface
{
    int patch_a;
    Side side_a;
    int patch_b;
    Side side_b;
    bool reversed; ///< side parameters run oppositely (t_b = 1 - t_a)
};

struct BoundarySide
{
    int patch;
    Side side;
};

enum class VertexLocation { Interior, Boundary };

struct Vertex
{
    Eigen::VectorXd point;
    std::vector<std::pair<int, int>> incident; ///< (patch, corner)
    int valence = 0;
    VertexLocation location = VertexLocation::Interior;

    /// Interior vertex with valence != 4, or boundary vertex with valence >= 3.
    bool extraordinary() const;
};

struct MultiPatch
{
    std::vector<Patch> patches;
    std::vector<Interface> interfaces;
    std::vector<BoundarySide> boundaries;
    std::vector<Vertex> vertices;

    int dim() const { return patches.empty() ? 0 : patches.front().dim(); }
    Index num_patches() const { return static_cast<Index>(patches.size()); }
    /// Bounding-box diagonal of all control points.
    double diameter() const;
    int count_interior_ev() const;
    int count_boundary_ev() const;
};

/// Detects interfaces, boundary sides and vertices. `tol` <= 0 selects
/// 1e-8 times the domain diameter.
MultiPatch detect_topology(std::vector<Patch> patches, double tol = -1.0);

/// Maximum distance between matched side curves over `samples` points.
double interface_gap(const MultiPatch& mp, const Interface& itf, int samples = 50);

MultiPatch make_unit_square();
/// Six bilinear patches of the unit square with interior vertices of valence 3 and 5.
MultiPatch make_fig_domain();

/// Affine map x -> scale * x + shift applied to all planar coordinates.
MultiPatch transform_planar(const MultiPatch& mp, double scale, const Eigen::Vector2d& shift);

enum class ParaboloidKind { Hyperbolic, Elliptic };

/// Height of the paraboloid graph over planar coordinates (x, y).
double paraboloid_height(ParaboloidKind kind, double x, double y);

/// Lifts a planar multipatch to the paraboloid graph; patches are elevated to
/// degree p and the height is interpolated exactly at tensor Greville points.
MultiPatch make_paraboloid(ParaboloidKind kind, const MultiPatch& base, int degree);

/// Degree elevation to p followed by uniform knot insertion: `elements` spans
/// per direction, interior knots of multiplicity p - r. Topology is kept.
MultiPatch refine_to(const MultiPatch& mp, int degree, int regularity, int elements);

/// Patch-wise knot-insertion/elevation of a single patch.
Patch refine_patch(const Patch& patch, const TensorBasisSpec& target);

/// Newton inversion of the geometry map. Returns false when the point is not
/// found inside the closed parameter square within `tol`.
bool invert_point(const Patch& patch, const Eigen::VectorXd& target, std::array<double, 2>& uv,
                  double tol = 1e-10);

// text format: see mpatch_io.cpp
void write_mpatch(std::ostream& os, const MultiPatch& mp);
MultiPatch read_mpatch(std::istream& is);
void save_mpatch(const std::string& path, const MultiPatch& mp);
MultiPatch load_mpatch(const std::string& path);

} // namespace mpiga
