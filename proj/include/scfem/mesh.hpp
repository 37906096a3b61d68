#pragma once

#include "scfem/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace scfem {

/// One edge of the triangulation with its global orientation data.
///
/// For interior edges the two adjacent triangles are stored as
/// tri[0] = the one with the larger index, tri[1] = the smaller, and the unit
/// normal points from tri[0] into tri[1].  For boundary edges tri[1] == -1 and
/// the normal is the outward normal of the domain.
struct MeshEdge {
    int a = -1, b = -1;        // endpoint vertex indices, a < b
    int tri[2] = {-1, -1};
    Vec2 normal = Vec2::Zero();
    Vec2 midpoint = Vec2::Zero();
    double length = 0.0;
    bool on_boundary = false;
};

/// Conforming triangulation of a polygonal domain.
///
/// Triangles are stored counterclockwise.  The edge table is closed: every
/// triangle side appears exactly once, interior edges have two adjacent
/// triangles and boundary edges one.  Immutable after construction.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<MeshEdge> edges;
    // tri_edges[t][i] is the global index of the edge opposite local vertex i.
    std::vector<std::array<int, 3>> tri_edges;
    std::vector<bool> vertex_on_boundary;
    double h_max = 0.0;
    int refinement_level = 0;   // lineage: number of uniform refinements applied

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }

    const Vec2& vertex(int t, int local) const { return vertices[triangles[t][local]]; }

    double signed_area(int t) const {
        const Vec2& p0 = vertex(t, 0);
        return 0.5 * cross2(vertex(t, 1) - p0, vertex(t, 2) - p0);
    }

    double area(int t) const { return std::abs(signed_area(t)); }

    double diameter(int t) const {
        double d = 0.0;
        for (int i = 0; i < 3; ++i)
            d = std::max(d, (vertex(t, (i + 1) % 3) - vertex(t, i)).norm());
        return d;
    }

    Vec2 centroid(int t) const { return (vertex(t, 0) + vertex(t, 1) + vertex(t, 2)) / 3.0; }

    /// Outward unit normal of triangle t on its local edge i (opposite vertex i).
    Vec2 outward_normal(int t, int i) const {
        Vec2 d = vertex(t, (i + 2) % 3) - vertex(t, (i + 1) % 3);
        return rotate_cw(d).normalized();
    }

    /// +1 if the stored global normal of edge tri_edges[t][i] equals the outward
    /// normal of t there, -1 otherwise.
    double edge_sign(int t, int i) const {
        const MeshEdge& e = edges[tri_edges[t][i]];
        return (e.tri[0] == t || e.on_boundary) ? 1.0 : -1.0;
    }

    /// Barycentric coordinates of x with respect to triangle t.
    Eigen::Vector3d barycentric(int t, const Vec2& x) const {
        const Vec2& p0 = vertex(t, 0);
        const Vec2& p1 = vertex(t, 1);
        const Vec2& p2 = vertex(t, 2);
        double det = cross2(p1 - p0, p2 - p0);
        double l1 = cross2(x - p0, p2 - p0) / det;
        double l2 = cross2(p1 - p0, x - p0) / det;
        return Eigen::Vector3d(1.0 - l1 - l2, l1, l2);
    }

    double total_area() const {
        double s = 0.0;
        for (int t = 0; t < n_triangles(); ++t) s += area(t);
        return s;
    }
};

namespace detail {

inline void check_triangle(const Mesh& m, int t, bool fix_orientation,
                           std::array<int, 3>& tri) {
    for (int k = 0; k < 3; ++k) {
        if (tri[k] < 0 || tri[k] >= m.n_vertices())
            throw MeshError("triangle " + std::to_string(t) + ": vertex index out of range");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
        throw MeshError("triangle " + std::to_string(t) + ": repeated vertex");
    const Vec2& p0 = m.vertices[tri[0]];
    double sa = 0.5 * cross2(m.vertices[tri[1]] - p0, m.vertices[tri[2]] - p0);
    double hk = std::max({(m.vertices[tri[1]] - p0).norm(),
                          (m.vertices[tri[2]] - m.vertices[tri[1]]).norm(),
                          (p0 - m.vertices[tri[2]]).norm()});
    if (std::abs(sa) < 1e-14 * hk * hk)
        throw MeshError("triangle " + std::to_string(t) + ": degenerate (area too small)");
    if (sa < 0.0) {
        if (!fix_orientation)
            throw MeshError("triangle " + std::to_string(t) + ": inverted triangle");
        std::swap(tri[1], tri[2]);
    }
}

/// Build the edge table and validate conformity.  Edge indices follow the
/// first-encounter order over triangles, which makes them deterministic.
inline void build_topology(Mesh& m, bool fix_orientation) {
    if (m.triangles.empty()) throw MeshError("mesh has no triangles");
    {
        std::map<std::pair<double, double>, int> seen;
        for (int v = 0; v < m.n_vertices(); ++v) {
            auto key = std::make_pair(m.vertices[v].x(), m.vertices[v].y());
            auto [it, inserted] = seen.emplace(key, v);
            if (!inserted)
                throw MeshError("duplicate vertex: " + std::to_string(it->second) + " and " +
                                std::to_string(v));
        }
    }
    for (int t = 0; t < m.n_triangles(); ++t)
        check_triangle(m, t, fix_orientation, m.triangles[t]);

    m.edges.clear();
    m.tri_edges.assign(m.triangles.size(), {-1, -1, -1});
    std::map<std::pair<int, int>, int> edge_of;
    for (int t = 0; t < m.n_triangles(); ++t) {
        for (int i = 0; i < 3; ++i) {
            int va = m.triangles[t][(i + 1) % 3];
            int vb = m.triangles[t][(i + 2) % 3];
            auto key = std::minmax(va, vb);
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                MeshEdge e;
                e.a = key.first;
                e.b = key.second;
                e.tri[0] = t;
                edge_of.emplace(key, m.n_edges());
                m.tri_edges[t][i] = m.n_edges();
                m.edges.push_back(e);
            } else {
                MeshEdge& e = m.edges[it->second];
                if (e.tri[1] != -1)
                    throw MeshError("non-conforming mesh: edge (" + std::to_string(e.a) + "," +
                                    std::to_string(e.b) + ") shared by more than two triangles");
                e.tri[1] = t;
                m.tri_edges[t][i] = it->second;
            }
        }
    }

    std::vector<int> vertex_use(m.n_vertices(), 0);
    for (const auto& tri : m.triangles)
        for (int v : tri) ++vertex_use[v];
    for (int v = 0; v < m.n_vertices(); ++v)
        if (vertex_use[v] == 0)
            throw MeshError("vertex " + std::to_string(v) + " is not used by any triangle");

    // Orient edges and fill geometry.  K_e^1 is the adjacent triangle with the
    // larger index; the normal points from K_e^1 to K_e^2 (outward on boundary).
    m.vertex_on_boundary.assign(m.n_vertices(), false);
    std::vector<int> boundary_edges_at(m.n_vertices(), 0);
    m.h_max = 0.0;
    for (auto& e : m.edges) {
        e.on_boundary = (e.tri[1] == -1);
        if (!e.on_boundary && e.tri[0] < e.tri[1]) std::swap(e.tri[0], e.tri[1]);
        const Vec2& pa = m.vertices[e.a];
        const Vec2& pb = m.vertices[e.b];
        e.midpoint = 0.5 * (pa + pb);
        e.length = (pb - pa).norm();
        // outward normal of tri[0] on this edge
        int t = e.tri[0];
        int i = 0;
        while (m.tri_edges[t][i] != (int)(&e - m.edges.data())) ++i;
        Vec2 d = m.vertices[m.triangles[t][(i + 2) % 3]] - m.vertices[m.triangles[t][(i + 1) % 3]];
        e.normal = rotate_cw(d).normalized();
        if (e.on_boundary) {
            m.vertex_on_boundary[e.a] = true;
            m.vertex_on_boundary[e.b] = true;
            ++boundary_edges_at[e.a];
            ++boundary_edges_at[e.b];
        }
    }
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (boundary_edges_at[v] != 0 && boundary_edges_at[v] != 2)
            throw MeshError("dangling edge (hanging node) at vertex " + std::to_string(v));
    }
    for (int t = 0; t < m.n_triangles(); ++t) m.h_max = std::max(m.h_max, m.diameter(t));
}

} // namespace detail

/// Assemble a mesh from raw vertex/triangle lists, building the edge table.
inline Mesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                      bool fix_orientation = false) {
    Mesh m;
    m.vertices = std::move(vertices);
    m.triangles = std::move(triangles);
    detail::build_topology(m, fix_orientation);
    return m;
}

/// Read a mesh from the line-oriented text format:
///   vertices N
///   x y            (N lines)
///   triangles M
///   i j k          (M lines, 0-based, CCW)
/// Lines starting with '#' are comments.
inline Mesh load_mesh(const std::string& path, bool fix_orientation = false) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file: " + path);

    auto next_line = [&in](std::string& line) -> bool {
        while (std::getline(in, line)) {
            auto pos = line.find('#');
            if (pos != std::string::npos) line.erase(pos);
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
        }
        return false;
    };

    std::string line, word;
    long n = 0;
    if (!next_line(line)) throw MeshError("parse error: empty mesh file " + path);
    {
        std::istringstream ls(line);
        if (!(ls >> word >> n) || word != "vertices" || n <= 0)
            throw MeshError("parse error: expected 'vertices N', got '" + line + "'");
    }
    std::vector<Vec2> verts;
    verts.reserve(n);
    for (long i = 0; i < n; ++i) {
        if (!next_line(line)) throw MeshError("parse error: unexpected end of vertex list");
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x >> y)) throw MeshError("parse error: bad vertex line '" + line + "'");
        verts.emplace_back(x, y);
    }
    long mcount = 0;
    if (!next_line(line)) throw MeshError("parse error: missing 'triangles M' header");
    {
        std::istringstream ls(line);
        if (!(ls >> word >> mcount) || word != "triangles" || mcount <= 0)
            throw MeshError("parse error: expected 'triangles M', got '" + line + "'");
    }
    std::vector<std::array<int, 3>> tris;
    tris.reserve(mcount);
    for (long t = 0; t < mcount; ++t) {
        if (!next_line(line)) throw MeshError("parse error: unexpected end of triangle list");
        std::istringstream ls(line);
        int i, j, k;
        if (!(ls >> i >> j >> k)) throw MeshError("parse error: bad triangle line '" + line + "'");
        tris.push_back({i, j, k});
    }
    return make_mesh(std::move(verts), std::move(tris), fix_orientation);
}

inline void save_mesh(const Mesh& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file: " + path);
    out.precision(17);
    out << "vertices " << m.n_vertices() << "\n";
    for (const auto& v : m.vertices) out << v.x() << " " << v.y() << "\n";
    out << "triangles " << m.n_triangles() << "\n";
    for (const auto& t : m.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

namespace detail {

/// Lattice mesher over the parallelogram {corner + s*span1 + t*span2}. The
/// per-cell functor selects the diagonal: true = main diagonal (lower-left to
/// upper-right in lattice coordinates), false = the other one.
template <class DiagonalRule>
Mesh generate_lattice(Vec2 corner, Vec2 span1, Vec2 span2, int n, DiagonalRule main_diagonal) {
    if (n < 1) throw MeshError("generate_structured: n must be >= 1");
    double det = cross2(span1, span2);
    if (std::abs(det) < 1e-14 * span1.norm() * span2.norm())
        throw MeshError("generate_structured: degenerate spans");
    if (det < 0.0) std::swap(span1, span2);   // keep triangles CCW

    std::vector<Vec2> verts;
    verts.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            verts.push_back(corner + (double(i) / n) * span1 + (double(j) / n) * span2);

    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j);
            int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            if (main_diagonal(i, j)) {
                tris.push_back({v00, v10, v11});
                tris.push_back({v00, v11, v01});
            } else {
                tris.push_back({v00, v10, v01});
                tris.push_back({v10, v11, v01});
            }
        }
    }
    return make_mesh(std::move(verts), std::move(tris));
}

} // namespace detail

/// Uniform triangulation of a parallelogram: 2n^2 congruent triangles in two
/// translate families; any two adjacent triangles form a parallelogram.
inline Mesh generate_structured(const Vec2& corner, const Vec2& span1, const Vec2& span2, int n) {
    return detail::generate_lattice(corner, span1, span2, n, [](int, int) { return false; });
}

/// Piecewise-uniform triangulation: the two halves of the parallelogram (split
/// across span1) carry opposite diagonal directions, so the mesh is uniform on
/// each half but not across the internal interface.
inline Mesh generate_piecewise_uniform(const Vec2& corner, const Vec2& span1, const Vec2& span2,
                                       int n) {
    if (n < 2 || n % 2 != 0)
        throw MeshError("generate_piecewise_uniform: n must be even and >= 2");
    return detail::generate_lattice(corner, span1, span2, n,
                                    [n](int i, int) { return i < n / 2; });
}

/// Red refinement: each triangle is split into four via its edge midpoints.
/// Parent vertex indices are preserved as a prefix of the child vertex list;
/// midpoint vertex v = (parent vertex count) + (parent edge index).
inline Mesh uniform_refine(const Mesh& parent, std::int64_t max_elements = 4'000'000) {
    if (4 * static_cast<std::int64_t>(parent.n_triangles()) > max_elements)
        throw BudgetError("uniform_refine: refinement would exceed element budget of " +
                          std::to_string(max_elements));
    std::vector<Vec2> verts = parent.vertices;
    verts.reserve(parent.n_vertices() + parent.n_edges());
    for (const auto& e : parent.edges) verts.push_back(e.midpoint);

    const int vn = parent.n_vertices();
    std::vector<std::array<int, 3>> tris;
    tris.reserve(4 * parent.n_triangles());
    for (int t = 0; t < parent.n_triangles(); ++t) {
        const auto& tri = parent.triangles[t];
        int m0 = vn + parent.tri_edges[t][0];   // midpoint opposite vertex 0
        int m1 = vn + parent.tri_edges[t][1];
        int m2 = vn + parent.tri_edges[t][2];
        tris.push_back({tri[0], m2, m1});
        tris.push_back({m2, tri[1], m0});
        tris.push_back({m1, m0, tri[2]});
        tris.push_back({m0, m1, m2});
    }
    Mesh child = make_mesh(std::move(verts), std::move(tris));
    child.refinement_level = parent.refinement_level + 1;
    return child;
}

/// Signed area of the domain from the boundary loop (sum over boundary edges of
/// the shoelace contribution, traversed with the domain on the left).
inline double boundary_polygon_area(const Mesh& m) {
    double s = 0.0;
    for (const auto& e : m.edges) {
        if (!e.on_boundary) continue;
        // orient (a,b) so the outward normal is rotate_cw(b - a)
        Vec2 d = m.vertices[e.b] - m.vertices[e.a];
        bool ab = rotate_cw(d).dot(e.normal) > 0.0;
        const Vec2& p = ab ? m.vertices[e.a] : m.vertices[e.b];
        const Vec2& q = ab ? m.vertices[e.b] : m.vertices[e.a];
        s += 0.5 * cross2(p, q);
    }
    return s;
}

} // namespace scfem
