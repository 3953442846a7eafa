#include <doctest.h>

#include "mpiga/quadlayout.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

using namespace mpiga;

namespace {

/// OBJ text of the unit cells [i,i+1]x[j,j+1] for which keep(i,j) holds.
template <class Keep>
std::string grid_obj(int nx, int ny, Keep keep)
{
    std::ostringstream os;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            os << "v " << i << ' ' << j << " 0\n";
    auto id = [&](int i, int j) { return 1 + i + (nx + 1) * j; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (keep(i, j))
                os << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1)
                   << '\n';
    return os.str();
}

std::string grid_obj(int nx, int ny)
{
    return grid_obj(nx, ny, [](int, int) { return true; });
}

/// Brute-force check that two face partitions agree up to relabelling.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b)
{
    std::map<int, int> ab, ba;
    for (std::size_t f = 0; f < a.size(); ++f)
    {
        auto [i, ni] = ab.emplace(a[f], b[f]);
        auto [j, nj] = ba.emplace(b[f], a[f]);
        if (i->second != b[f] || j->second != a[f])
            return false;
    }
    return true;
}

Eigen::Vector3d centroid(const QuadMesh& m, int f)
{
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int k = 0; k < 4; ++k)
        c += m.vertices[m.faces[f][k]];
    return c / 4.0;
}

} // namespace

TEST_CASE("OBJ ingestion")
{
    const QuadMesh m = load_quad_obj(grid_obj(2, 2));
    CHECK(m.vertices.size() == 9);
    CHECK(m.faces.size() == 4);
    CHECK(m.num_edges() == 12);
    CHECK(m.dim == 2);
    CHECK_THROWS_AS(load_quad_obj("v 0 0\nv 1 0\nv 0 1\nf 1 2 3\n"), MeshError);
    CHECK_THROWS_AS(load_quad_obj("v 0 0\nv 1 0\nv 1 1\nf 1 2 3 4\n"), MeshError);
    const QuadMesh slashes = load_quad_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n");
    CHECK(slashes.faces.size() == 1);
}

TEST_CASE("half-edge structure")
{
    const HalfEdgeMesh he(load_quad_obj(grid_obj(3, 2)));
    CHECK(he.num_edges() == 17);
    for (int h = 0; h < he.num_half_edges(); ++h)
    {
        CHECK(he.next(he.next(he.next(he.next(h)))) == h);
        if (he.twin(h) >= 0)
        {
            CHECK(he.twin(he.twin(h)) == h);
            CHECK(he.origin(he.twin(h)) == he.target(h));
        }
    }
    // Euler characteristic of a disk
    CHECK(he.num_vertices() - he.num_edges() + he.num_faces() == 1);
}

TEST_CASE("regular grid gives one patch")
{
    const PatchLayout l = quad_layout(load_quad_obj(grid_obj(3, 3)));
    CHECK(trace_interfaces(HalfEdgeMesh(load_quad_obj(grid_obj(3, 3)))).empty());
    REQUIRE(l.multipatch.num_patches() == 1);
    CHECK(l.multipatch.patches[0].basis.u.numElements() == 3);
    CHECK(l.multipatch.patches[0].basis.v.numElements() == 3);
    CHECK(l.interior_ev == 0);
    const HalfEdgeMesh he(load_quad_obj(grid_obj(3, 3)));
    const auto cls = classify_vertices(he);
    CHECK(cls[0] == VertexClass::BoundaryRegular);
    CHECK(cls[5] == VertexClass::Regular);
}

TEST_CASE("six-patch layout from its coarse mesh")
{
    const QuadMesh m = mesh_from_multipatch(make_fig_domain());
    CHECK(m.faces.size() == 6);
    CHECK(m.vertices.size() == 12);
    CHECK(m.num_edges() == 17);
    const HalfEdgeMesh he(m);
    const auto cls = classify_vertices(he);
    for (int v = 0; v < he.num_vertices(); ++v)
    {
        const Eigen::Vector3d x = m.vertices[v];
        if ((x - Eigen::Vector3d(1.0 / 3, 2.0 / 3, 0)).norm() < 1e-12)
        {
            CHECK(cls[v] == VertexClass::InteriorEV);
            CHECK(he.valence(v) == 5);
        }
        if ((x - Eigen::Vector3d(2.0 / 3, 1.0 / 3, 0)).norm() < 1e-12)
        {
            CHECK(cls[v] == VertexClass::InteriorEV);
            CHECK(he.valence(v) == 3);
        }
    }
    const PatchLayout l = quad_layout(m);
    CHECK(l.multipatch.num_patches() == 6);
}

TEST_CASE("refined six-patch meshes recover the six patches")
{
    const MultiPatch fig = make_fig_domain();
    for (int k : {2, 4, 8})
    {
        const auto t0 = std::chrono::steady_clock::now();
        const QuadMesh m = mesh_from_multipatch(refine_to(fig, 1, 0, k));
        const HalfEdgeMesh he(m);
        const auto traces = trace_interfaces(he);
        CHECK(traces.size() == 7);
        const PatchLayout l = extract_patches(he, traces);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(secs < 1.0);
        REQUIRE(l.multipatch.num_patches() == 6);
        CHECK(l.interior_ev == 2);
        CHECK(l.boundary_ev == 0);
        std::vector<int> ev;
        for (const Vertex& v : l.multipatch.vertices)
            if (v.extraordinary())
                ev.push_back(v.valence);
        std::sort(ev.begin(), ev.end());
        CHECK(ev == std::vector<int>{3, 5});
        CHECK(l.multipatch.interfaces.size() == 7);

        // oracle: faces were generated patch by patch, k*k at a time
        std::vector<int> expected(m.faces.size());
        for (std::size_t f = 0; f < m.faces.size(); ++f)
            expected[f] = static_cast<int>(f) / (k * k);
        CHECK(same_partition(expected, l.face_patch));
        std::size_t total = 0;
        for (const auto& g : l.patch_faces)
            total += g.size();
        CHECK(total == m.faces.size());

        // re-meshing the extracted patches and tracing again is idempotent
        CHECK(quad_layout(mesh_from_multipatch(l.multipatch)).multipatch.num_patches() == 6);
    }
}

TEST_CASE("valence-3 interior vertex starts three traces")
{
    const QuadMesh m = mesh_from_multipatch(refine_to(make_fig_domain(), 1, 0, 2));
    const HalfEdgeMesh he(m);
    const auto traces = trace_interfaces(he);
    int from_v3 = 0;
    for (const auto& t : traces)
        for (int v : {t.start_vertex, t.end_vertex})
            if ((m.vertices[v] - Eigen::Vector3d(2.0 / 3, 1.0 / 3, 0)).norm() < 1e-12)
                ++from_v3;
    CHECK(from_v3 == 3);
}

TEST_CASE("L-shaped grid with a boundary EV")
{
    // [0,4]^2 without the upper-right quarter: reentrant corner (2,2)
    const QuadMesh m = load_quad_obj(grid_obj(4, 4, [](int i, int j) { return i < 2 || j < 2; }));
    const PatchLayout l = quad_layout(m);
    CHECK(l.boundary_ev == 1);
    CHECK(l.multipatch.num_patches() == 3);
    std::vector<int> expected(m.faces.size());
    for (std::size_t f = 0; f < m.faces.size(); ++f)
    {
        const Eigen::Vector3d c = centroid(m, static_cast<int>(f));
        expected[f] = (c(0) < 2 ? 0 : 1) + (c(1) < 2 ? 0 : 2);
    }
    CHECK(same_partition(expected, l.face_patch));
    for (const Patch& p : l.multipatch.patches)
    {
        CHECK(p.basis.u.numElements() == 2);
        CHECK(p.basis.v.numElements() == 2);
        CHECK(eval_geometry(p, 0.5, 0.5, 1).jacobian().determinant() > 0.0);
    }
}

TEST_CASE("inconsistent orientation is rejected")
{
    CHECK_THROWS_AS(HalfEdgeMesh(load_quad_obj("v 0 0\nv 1 0\nv 1 1\nv 0 1\nv 2 0\nv 2 1\n"
                                               "f 1 2 3 4\nf 2 3 6 5\n")),
                    MeshError);
}
