/** @file quadlayout.hpp

    @brief Quad-mesh ingestion and conversion of an unstructured quad mesh
    into a bilinear multipatch by tracing edges out of extraordinary vertices.
*/

#pragma once

#include "mpiga/multipatch.hpp"

#include <array>
#include <string>
#include <vector>

namespace mpiga {

class MeshError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct QuadMesh
{
    int dim = 2;                          ///< 2 or 3 (taken from the `v` records)
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 4>> faces; ///< counterclockwise, 0-based

    std::size_t num_edges() const;
};

/// OBJ subset: `v x y [z]` and `f i j k l` with 1-based indices; other
/// records are ignored.
QuadMesh load_quad_obj(const std::string& text);
QuadMesh load_quad_obj_file(const std::string& path);
std::string to_obj(const QuadMesh& mesh);

/// Quad mesh of every patch's control net (one quad per control-net cell);
/// vertices shared between patches are merged.
QuadMesh mesh_from_multipatch(const MultiPatch& mp, double tol = 1e-10);

class HalfEdgeMesh
{
public:
    explicit HalfEdgeMesh(QuadMesh mesh);

    const QuadMesh& mesh() const { return m_mesh; }
    int num_half_edges() const { return static_cast<int>(m_origin.size()); }
    int num_edges() const { return m_num_edges; }
    int num_vertices() const { return static_cast<int>(m_mesh.vertices.size()); }
    int num_faces() const { return static_cast<int>(m_mesh.faces.size()); }

    int origin(int h) const { return m_origin[h]; }
    int target(int h) const { return m_origin[next(h)]; }
    int face(int h) const { return h / 4; }
    int next(int h) const { return 4 * (h / 4) + (h + 1) % 4; }
    int prev(int h) const { return 4 * (h / 4) + (h + 3) % 4; }
    int twin(int h) const { return m_twin[h]; } ///< -1 on the boundary
    int edge(int h) const { return m_edge[h]; }
    bool is_boundary_edge(int e) const { return m_edge_boundary[e]; }

    int valence(int v) const { return m_valence[v]; } ///< incident faces
    bool is_boundary_vertex(int v) const { return m_vertex_boundary[v]; }
    /// Half-edges leaving vertex v.
    const std::vector<int>& outgoing(int v) const { return m_outgoing[v]; }

private:
    QuadMesh m_mesh;
    std::vector<int> m_origin, m_twin, m_edge;
    std::vector<bool> m_edge_boundary;
    int m_num_edges = 0;
    std::vector<int> m_valence;
    std::vector<bool> m_vertex_boundary;
    std::vector<std::vector<int>> m_outgoing;
};

enum class VertexClass { Regular, InteriorEV, BoundaryEV, BoundaryRegular };

std::vector<VertexClass> classify_vertices(const HalfEdgeMesh& mesh);

struct TracePath
{
    int start_vertex;
    int end_vertex;
    std::vector<int> edges; ///< undirected edge ids in traversal order
};

/// Straight edge paths from every EV, continued through regular interior
/// vertices until another EV or the boundary. Paths covering the same edge
/// set are reported once.
std::vector<TracePath> trace_interfaces(const HalfEdgeMesh& mesh);

struct PatchLayout
{
    MultiPatch multipatch;
    std::vector<int> face_patch;            ///< patch id of every mesh face
    std::vector<std::vector<int>> patch_faces;
    int interior_ev = 0;
    int boundary_ev = 0;
};

/// Partitions faces along boundary and traced edges into structured groups
/// and turns every group into one bilinear-per-element patch.
PatchLayout extract_patches(const HalfEdgeMesh& mesh, const std::vector<TracePath>& traces);

/// classify + trace + extract.
PatchLayout quad_layout(const QuadMesh& mesh);

} // namespace mpiga
