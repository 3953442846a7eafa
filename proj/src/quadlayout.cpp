/** @file quadlayout.cpp

    @brief Half-edge quad mesh, EV classification, interface tracing and patch
    extraction.
*/

#include "mpiga/quadlayout.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mpiga {

std::size_t QuadMesh::num_edges() const
{
    std::set<std::pair<int, int>> e;
    for (const auto& f : faces)
        for (int k = 0; k < 4; ++k)
        {
            const int a = f[k], b = f[(k + 1) % 4];
            e.emplace(std::min(a, b), std::max(a, b));
        }
    return e.size();
}

QuadMesh load_quad_obj(const std::string& text)
{
    QuadMesh mesh;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<std::vector<int>> raw_faces;
    while (std::getline(in, line))
    {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        if (tag == "v")
        {
            Eigen::Vector3d x = Eigen::Vector3d::Zero();
            int n = 0;
            double c;
            while (n < 3 && ls >> c)
                x(n++) = c;
            if (n < 2)
                throw MeshError("line " + std::to_string(lineno) + ": vertex needs at least two coordinates");
            if (n == 3 && x(2) != 0.0)
                mesh.dim = 3;
            mesh.vertices.push_back(x);
        }
        else if (tag == "f")
        {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok)
            {
                const std::string head = tok.substr(0, tok.find('/'));
                try
                {
                    idx.push_back(std::stoi(head));
                }
                catch (const std::exception&)
                {
                    throw MeshError("line " + std::to_string(lineno) + ": bad face index '" + tok + "'");
                }
            }
            if (idx.size() != 4)
                throw MeshError("line " + std::to_string(lineno) + ": non-quad face with " +
                                std::to_string(idx.size()) + " vertices");
            raw_faces.push_back(std::move(idx));
        }
    }
    const int nv = static_cast<int>(mesh.vertices.size());
    for (const auto& f : raw_faces)
    {
        std::array<int, 4> q;
        for (int k = 0; k < 4; ++k)
        {
            if (f[k] < 1 || f[k] > nv)
                throw MeshError("dangling vertex index " + std::to_string(f[k]));
            q[k] = f[k] - 1;
        }
        mesh.faces.push_back(q);
    }
    return mesh;
}

QuadMesh load_quad_obj_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw MeshError("cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return load_quad_obj(ss.str());
}

std::string to_obj(const QuadMesh& mesh)
{
    std::ostringstream os;
    os.precision(17);
    for (const auto& v : mesh.vertices)
        os << "v " << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
    for (const auto& f : mesh.faces)
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
    return os.str();
}

QuadMesh mesh_from_multipatch(const MultiPatch& mp, double tol)
{
    QuadMesh mesh;
    mesh.dim = mp.dim();
    auto vertex_id = [&](const Eigen::VectorXd& x) {
        Eigen::Vector3d y = Eigen::Vector3d::Zero();
        y.head(x.size()) = x;
        for (std::size_t k = 0; k < mesh.vertices.size(); ++k)
            if ((mesh.vertices[k] - y).norm() <= tol)
                return static_cast<int>(k);
        mesh.vertices.push_back(y);
        return static_cast<int>(mesh.vertices.size()) - 1;
    };
    for (const Patch& p : mp.patches)
    {
        const Index nu = p.basis.u.size(), nv = p.basis.v.size();
        std::vector<int> ids(nu * nv);
        for (Index k = 0; k < nu * nv; ++k)
            ids[k] = vertex_id(p.control_points.row(k).transpose());
        for (Index j = 0; j + 1 < nv; ++j)
            for (Index i = 0; i + 1 < nu; ++i)
                mesh.faces.push_back({ids[p.basis.index(i, j)], ids[p.basis.index(i + 1, j)],
                                      ids[p.basis.index(i + 1, j + 1)], ids[p.basis.index(i, j + 1)]});
    }
    return mesh;
}

HalfEdgeMesh::HalfEdgeMesh(QuadMesh mesh) : m_mesh(std::move(mesh))
{
    const int nf = static_cast<int>(m_mesh.faces.size());
    const int nv = static_cast<int>(m_mesh.vertices.size());
    m_origin.resize(4 * nf);
    m_twin.assign(4 * nf, -1);
    m_edge.assign(4 * nf, -1);
    std::map<std::pair<int, int>, int> directed;
    for (int f = 0; f < nf; ++f)
    {
        const auto& q = m_mesh.faces[f];
        for (int k = 0; k < 4; ++k)
        {
            if (q[k] < 0 || q[k] >= nv)
                throw MeshError("face references a missing vertex");
            if (q[k] == q[(k + 1) % 4] || q[k] == q[(k + 2) % 4])
                throw MeshError("degenerate quad face " + std::to_string(f));
            m_origin[4 * f + k] = q[k];
            if (!directed.emplace(std::make_pair(q[k], q[(k + 1) % 4]), 4 * f + k).second)
                throw MeshError("edge shared by more than two faces or inconsistently oriented faces");
        }
    }
    for (const auto& [key, h] : directed)
    {
        auto it = directed.find({key.second, key.first});
        if (it != directed.end())
            m_twin[h] = it->second;
    }
    for (int h = 0; h < 4 * nf; ++h)
    {
        if (m_edge[h] >= 0)
            continue;
        m_edge[h] = m_num_edges;
        if (m_twin[h] >= 0)
            m_edge[m_twin[h]] = m_num_edges;
        m_edge_boundary.push_back(m_twin[h] < 0);
        ++m_num_edges;
    }
    m_valence.assign(nv, 0);
    m_vertex_boundary.assign(nv, false);
    m_outgoing.assign(nv, {});
    for (int h = 0; h < 4 * nf; ++h)
    {
        ++m_valence[m_origin[h]];
        m_outgoing[m_origin[h]].push_back(h);
        if (m_twin[h] < 0)
        {
            m_vertex_boundary[origin(h)] = true;
            m_vertex_boundary[target(h)] = true;
        }
    }
}

std::vector<VertexClass> classify_vertices(const HalfEdgeMesh& mesh)
{
    std::vector<VertexClass> cls(mesh.num_vertices(), VertexClass::Regular);
    for (int v = 0; v < mesh.num_vertices(); ++v)
    {
        const int val = mesh.valence(v);
        if (val == 0)
            continue; // unreferenced vertex
        if (mesh.is_boundary_vertex(v))
            cls[v] = val >= 3 ? VertexClass::BoundaryEV : VertexClass::BoundaryRegular;
        else
            cls[v] = val != 4 ? VertexClass::InteriorEV : VertexClass::Regular;
    }
    return cls;
}

std::vector<TracePath> trace_interfaces(const HalfEdgeMesh& mesh)
{
    const std::vector<VertexClass> cls = classify_vertices(mesh);
    std::vector<TracePath> out;
    std::set<std::vector<int>> seen;
    for (int v = 0; v < mesh.num_vertices(); ++v)
    {
        if (cls[v] != VertexClass::InteriorEV && cls[v] != VertexClass::BoundaryEV)
            continue;
        for (int h : mesh.outgoing(v))
        {
            if (mesh.twin(h) < 0)
                continue; // boundary edges bound patches anyway
            TracePath path{v, -1, {}};
            std::set<int> on_path;
            int cur = h;
            while (true)
            {
                const int e = mesh.edge(cur);
                if (!on_path.insert(e).second)
                    break; // closed loop of regular vertices
                path.edges.push_back(e);
                const int b = mesh.target(cur);
                path.end_vertex = b;
                if (cls[b] != VertexClass::Regular)
                    break;
                // opposite edge at a valence-4 interior vertex: rotate twice
                const int o = mesh.twin(cur);
                const int r1 = mesh.twin(mesh.prev(o));
                cur = mesh.twin(mesh.prev(r1));
            }
            std::vector<int> key = path.edges;
            std::sort(key.begin(), key.end());
            if (seen.insert(key).second)
                out.push_back(std::move(path));
        }
    }
    return out;
}

PatchLayout extract_patches(const HalfEdgeMesh& mesh, const std::vector<TracePath>& traces)
{
    std::vector<bool> cut(mesh.num_edges(), false);
    for (int e = 0; e < mesh.num_edges(); ++e)
        cut[e] = mesh.is_boundary_edge(e);
    for (const TracePath& t : traces)
        for (int e : t.edges)
            cut[e] = true;

    const int nf = mesh.num_faces();
    PatchLayout layout;
    layout.face_patch.assign(nf, -1);
    for (int f0 = 0; f0 < nf; ++f0)
    {
        if (layout.face_patch[f0] >= 0)
            continue;
        const int gid = static_cast<int>(layout.patch_faces.size());
        std::vector<int> group{f0}, stack{f0};
        layout.face_patch[f0] = gid;
        while (!stack.empty())
        {
            const int f = stack.back();
            stack.pop_back();
            for (int k = 0; k < 4; ++k)
            {
                const int h = 4 * f + k;
                if (cut[mesh.edge(h)])
                    continue;
                const int g = mesh.face(mesh.twin(h));
                if (layout.face_patch[g] < 0)
                {
                    layout.face_patch[g] = gid;
                    group.push_back(g);
                    stack.push_back(g);
                }
            }
        }
        layout.patch_faces.push_back(std::move(group));
    }

    std::vector<Patch> patches;
    for (std::size_t gid = 0; gid < layout.patch_faces.size(); ++gid)
    {
        const auto& group = layout.patch_faces[gid];
        const std::string where = "face group " + std::to_string(gid);
        // corner face: bottom and left edges cut
        int hb0 = -1;
        for (int f : group)
        {
            for (int k = 0; k < 4 && hb0 < 0; ++k)
                if (cut[mesh.edge(4 * f + k)] && cut[mesh.edge(mesh.prev(4 * f + k))])
                    hb0 = 4 * f + k;
            if (hb0 >= 0)
                break;
        }
        if (hb0 < 0)
            throw MeshError(where + " has no corner; not a structured grid");

        std::vector<std::vector<int>> rows; // bottom half-edges, row by row
        int row_start = hb0;
        std::set<int> visited;
        while (true)
        {
            std::vector<int> row;
            int hb = row_start;
            if (!cut[mesh.edge(mesh.prev(hb))])
                throw MeshError(where + " is not a structured grid (left side)");
            while (true)
            {
                if (layout.face_patch[mesh.face(hb)] != static_cast<int>(gid) || !visited.insert(mesh.face(hb)).second)
                    throw MeshError(where + " is not a structured grid");
                row.push_back(hb);
                const int right = mesh.next(hb);
                if (cut[mesh.edge(right)])
                    break;
                hb = mesh.next(mesh.twin(right));
            }
            if (!rows.empty() && row.size() != rows.front().size())
                throw MeshError(where + " is not a structured grid (ragged rows)");
            rows.push_back(row);
            const int top = mesh.next(mesh.next(row_start));
            // the whole top row of edges must be uniformly cut or uncut
            const bool top_cut = cut[mesh.edge(top)];
            for (int h : row)
                if (cut[mesh.edge(mesh.next(mesh.next(h)))] != top_cut)
                    throw MeshError(where + " is not a structured grid (partial cut)");
            if (top_cut)
                break;
            row_start = mesh.twin(top);
        }
        if (visited.size() != group.size())
            throw MeshError(where + " is not a structured grid (unvisited faces)");

        const Index m = static_cast<Index>(rows.front().size());
        const Index n = static_cast<Index>(rows.size());
        std::vector<double> ku{0.0, 0.0}, kv{0.0, 0.0};
        for (Index i = 1; i < m; ++i)
            ku.push_back(static_cast<double>(i) / m);
        for (Index j = 1; j < n; ++j)
            kv.push_back(static_cast<double>(j) / n);
        ku.insert(ku.end(), {1.0, 1.0});
        kv.insert(kv.end(), {1.0, 1.0});
        Patch p{TensorBasisSpec{BasisSpec1D(1, ku), BasisSpec1D(1, kv)},
                Eigen::MatrixXd((m + 1) * (n + 1), mesh.mesh().dim)};
        auto put = [&](Index i, Index j, int vtx) {
            p.control_points.row(p.basis.index(i, j)) = mesh.mesh().vertices[vtx].head(mesh.mesh().dim).transpose();
        };
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < m; ++i)
            {
                const int hb = rows[j][i];
                put(i, j, mesh.origin(hb));
                put(i + 1, j, mesh.target(hb));
                put(i + 1, j + 1, mesh.target(mesh.next(hb)));
                put(i, j + 1, mesh.origin(mesh.prev(hb)));
            }
        patches.push_back(std::move(p));
    }

    layout.multipatch = detect_topology(std::move(patches));
    for (VertexClass c : classify_vertices(mesh))
    {
        layout.interior_ev += c == VertexClass::InteriorEV;
        layout.boundary_ev += c == VertexClass::BoundaryEV;
    }
    return layout;
}

PatchLayout quad_layout(const QuadMesh& mesh)
{
    const HalfEdgeMesh he(mesh);
    return extract_patches(he, trace_interfaces(he));
}

} // namespace mpiga
