/** @file shell.hpp

    @brief Linear Kirchhoff-Love shells on surface multipatches: stiffness,
    loads, boundary conditions, penalty coupling, energy and membrane stress.

    Displacements use a vector extraction map (three components, component
    major). Assembly works on the merged numbering like the scalar forms in
    pde.hpp.
*/

#pragma once

#include "mpiga/pde.hpp"

#include <array>
#include <iosfwd>

namespace mpiga {

class ShellError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ShellMaterial
{
    double E = 2.0e5;
    double nu = 0.3;
    double t = 0.01;
    double rho = 0.0;

    void validate() const;
    double bending_stiffness() const { return E * t * t * t / 12.0; }
};

/// Contravariant plane-stress tensor in Voigt form acting on
/// (e11, e22, 2 e12) for the metric `a` (covariant).
Eigen::Matrix3d plane_stress_matrix(const Eigen::Matrix2d& a, double E, double nu);

struct LoadSpec
{
    enum class Kind { Distributed, Point };

    Kind kind = Kind::Distributed;
    Eigen::Vector3d force = Eigen::Vector3d::Zero(); ///< per unit area, or total point force
    int patch = -1;                                  ///< point load: patch hint, -1 searches all
    Eigen::Vector3d target = Eigen::Vector3d::Zero(); ///< point load: physical location

    static LoadSpec distributed(const Eigen::Vector3d& q);
    static LoadSpec point(const Eigen::Vector3d& target, const Eigen::Vector3d& force, int patch = -1);
};

/// Boundary condition on a patch side or a patch corner. `fixed` selects the
/// displacement components removed strongly; `clamped` adds the weak
/// rotation condition along a side.
struct ShellBC
{
    enum class Where { Side, Corner };

    Where where = Where::Side;
    int patch = 0;
    int index = 0; ///< Side value or corner number a + 2b
    std::array<bool, 3> fixed{true, true, true};
    bool clamped = false;

    static ShellBC fixed_all(int patch, Side s);
    static ShellBC clamped_side(int patch, Side s);
    static ShellBC fixed_corner(int patch, int corner, std::array<bool, 3> components = {true, true, true});
    static ShellBC fixed_vertical(int patch, int corner) { return fixed_corner(patch, corner, {false, false, true}); }
};

/// Membrane and bending stiffness in merged numbering (3 * n_merged).
SparseMatrix assemble_kl_stiffness(const MultiPatch& mp, const ExtractionMap& map, const ShellMaterial& mat);

/// Load vector in merged numbering. Point loads are located by Newton
/// inversion; throws ShellError if no patch contains the target.
Eigen::VectorXd assemble_shell_load(const MultiPatch& mp, const ExtractionMap& map, const LoadSpec& load);

/// (alpha E t / h) int [u].[v] + (alpha E t^3 / (12 h)) int [da3(u).d][da3(v).d]
/// over every interface, with d the in-surface conormal of side a.
SparseMatrix penalty_shell_coupling(const MultiPatch& mp, const ExtractionMap& map, double alpha,
                                    const ShellMaterial& mat);

/// Weak zero-rotation term (alpha_r / h) int (da3(u).d)(da3(v).d) on every
/// clamped side, alpha_r = factor * E t^3 / 12.
SparseMatrix clamp_rotation_terms(const MultiPatch& mp, const ExtractionMap& map, const std::vector<ShellBC>& bcs,
                                  const ShellMaterial& mat, double factor = 1e3);

/// Translations (columns 0-2) and infinitesimal rotations about the axes
/// (columns 3-5) in merged numbering.
Eigen::MatrixXd rigid_body_modes(const MultiPatch& mp, const ExtractionMap& map);

/// Strongly eliminates the fixed components. Throws ShellError if a rigid
/// body mode survives the constraints.
ExtractionMap apply_strong_shell_bcs(const MultiPatch& mp, const ExtractionMap& map, const std::vector<ShellBC>& bcs);

struct ShellSystem
{
    ExtractionMap map; ///< constrained
    SparseMatrix K;    ///< global
    Eigen::VectorXd f; ///< global
};

/// Constrains the map, adds the clamp rotation penalty to the merged
/// stiffness and projects both operator and load.
ShellSystem apply_shell_bcs(const SparseMatrix& k_merged, const Eigen::VectorXd& f_merged, const MultiPatch& mp,
                            const ExtractionMap& map, const std::vector<ShellBC>& bcs, const ShellMaterial& mat,
                            double rotation_factor = 1e3);

/// W = 1/2 c^T K c.
double bending_energy(const Eigen::VectorXd& coeffs, const SparseMatrix& K);

struct ShellSolution
{
    ShellSystem system; ///< K holds the lower triangle only
    Eigen::VectorXd coeffs; ///< global
    double energy = 0.0;
};

/// Solves the constrained system; throws ShellError if it stays singular.
ShellSolution solve_shell(ShellSystem system);

/// Von Mises membrane stress at a parametric point of a patch.
double von_mises_at(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs,
                    const ShellMaterial& mat, int patch, double u, double v);

struct StressSample
{
    int patch = 0;
    double u = 0.0, v = 0.0;
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    double vm = 0.0;
};

/// (grid+1)^2 samples per patch on a uniform parameter grid, patch-major,
/// u fastest.
std::vector<StressSample> von_mises_membrane(const MultiPatch& mp, const ExtractionMap& map,
                                             const Eigen::VectorXd& coeffs, const ShellMaterial& mat, int grid = 64);

struct InterfaceJump
{
    double max_jump = 0.0;
    double mean_jump = 0.0;
    int samples = 0;
    std::vector<double> per_interface; ///< max jump of each interface
};

/// Stress jumps at `samples` points spread evenly over all interfaces.
InterfaceJump interface_stress_jump(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs,
                                    const ShellMaterial& mat, int samples = 200);

/// L2 norm of the displacement jump over all interfaces.
double interface_displacement_jump(const MultiPatch& mp, const ExtractionMap& map, const Eigen::VectorXd& coeffs);

void write_stress_csv(std::ostream& os, const std::vector<StressSample>& samples);
/// Legacy ASCII VTK structured grid of one patch's samples.
void write_stress_vtk(std::ostream& os, const std::vector<StressSample>& samples, int patch, int grid);
/// Marching-squares iso-lines of every patch grid, one segment per row:
/// level,patch,x0,y0,z0,x1,y1,z1.
void write_stress_contours(std::ostream& os, const std::vector<StressSample>& samples, int grid,
                           const std::vector<double>& levels = {1e5, 1e6, 1e7});

// Benchmark set-ups on paraboloids over [-1/2,1/2]^2.

/// Every boundary side on x = min(x) clamped.
std::vector<ShellBC> hyperbolic_shell_bcs(const MultiPatch& mp);
/// Vertical support at the four domain corners and in-plane fixation of the
/// corner at (min x, min y). `fix_spin` additionally removes u_y at the
/// corner (max x, min y), which the vertical-axis rotation otherwise leaves free.
std::vector<ShellBC> elliptic_shell_bcs(const MultiPatch& mp, bool fix_spin = true);

} // namespace mpiga
