/** @file smoothspace.hpp

    @brief Global-to-local extraction maps for the coupling strategies and the
    C1 space built as the null space of collocated gradient-jump constraints.

    A map has two stages. Patch-local coefficients are first merged (C0
    coupling glues matching interface coefficients, otherwise nothing is
    merged); the merged vector is then the image of the global coefficients
    under the sparse matrix `reduce`. The patches' own bases define the
    discretization.
*/

#pragma once

#include "mpiga/linalg.hpp"
#include "mpiga/multipatch.hpp"

#include <string>
#include <vector>

namespace mpiga {

enum class CouplingKind { SinglePatch, C0Merged, Uncoupled, SmoothC1 };

std::string to_string(CouplingKind k);

class CouplingError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ExtractionMap
{
    CouplingKind kind = CouplingKind::SinglePatch;
    int components = 1;                 ///< 3 for shell displacements
    std::vector<Index> patch_offsets;   ///< stacked local numbering, size np+1
    std::vector<Index> local_to_merged; ///< stacked local index -> merged scalar index
    Index n_merged = 0;
    SparseMatrix reduce;                ///< (components * n_merged) x n_global

    Index n_global() const { return reduce.cols(); }
    Index n_local(int patch) const { return patch_offsets[patch + 1] - patch_offsets[patch]; }
    Index merged_index(int patch, Index local) const { return local_to_merged[patch_offsets[patch] + local]; }

    /// Stacked local (scalar) x merged 0/1 matrix.
    SparseMatrix merge_matrix() const;
    /// Per-patch block E_k: (components * n_local(k)) x n_global, component-major.
    SparseMatrix patch_block(int patch) const;
    /// Local coefficients of patch k, n_local(k) x components.
    Eigen::MatrixXd patch_coefficients(int patch, const Eigen::VectorXd& global) const;
    /// Merged coefficients (components * n_merged) of a global vector.
    Eigen::VectorXd merged(const Eigen::VectorXd& global) const { return reduce * global; }
};

/// Identity on every patch (SinglePatch for one patch, Uncoupled otherwise).
ExtractionMap build_identity_map(const MultiPatch& mp);

/// Merges coefficients on matched interface traces. Throws CouplingError if
/// two sides of an interface do not carry the same knot vector.
ExtractionMap build_c0_map(const MultiPatch& mp);

/// Gradient-jump rows on the merged numbering of a C0 map: at p+3 Chebyshev
/// points per interface span, det(J_a) det(J_b) (grad u_a - grad u_b) . n_a
/// with n_a the (unnormalized) normal of side a. Surfaces use their planar
/// projection.
SparseMatrix build_c1_constraints(const MultiPatch& mp, const ExtractionMap& c0map);

/// Unit rows selecting every merged DoF with a nonzero boundary trace.
SparseMatrix boundary_value_rows(const MultiPatch& mp, const ExtractionMap& map);

/// c0map restricted to ker(C); orthonormal null-space basis.
ExtractionMap build_smooth_c1_map(const SparseMatrix& c, const ExtractionMap& c0map, double tol = 1e-10);

/// Convenience: C0 map, constraints (plus boundary value rows if requested)
/// and null space in one go.
ExtractionMap build_smooth_c1_map(const MultiPatch& mp, bool zero_boundary_values = false, double tol = 1e-10);

/// Restricts the map to global vectors whose merged image satisfies B m = 0.
/// B has components * n_merged columns.
ExtractionMap constrain(const ExtractionMap& map, const SparseMatrix& b, double tol = 1e-10);

/// Replicates a scalar map over `components` displacement components
/// (component-major merged numbering).
ExtractionMap vector_map(const ExtractionMap& scalar, int components);

struct MethodCheck
{
    std::string name;
    bool passed = true;
    std::vector<std::string> reasons; ///< failed requirements
};

struct RequirementReport
{
    std::vector<MethodCheck> methods; ///< AS-G1, Approx-C1, D-Patch, Almost-C1
    int interior_ev = 0;
    int boundary_ev = 0;
    int max_boundary_ev_valence = 0;

    bool any_passed() const;
    std::string summary() const;
};

/// Degree, regularity and geometry requirements of the four unstructured
/// spline constructions.
RequirementReport check_requirements(const MultiPatch& mp, int p, int r);

} // namespace mpiga
