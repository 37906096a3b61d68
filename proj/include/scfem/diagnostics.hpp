#pragma once

#include "scfem/mesh.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace scfem {

/// Classification data of one boundary vertex.  Non-corner vertices carry the
/// two boundary triangles flanking them along the boundary.
struct BoundaryVertexInfo {
    int vertex = -1;
    bool corner_like = true;   // in P_b^1
    int tri_left = -1, tri_right = -1;
    double deviation = std::numeric_limits<double>::quiet_NaN();   // scaled edge mismatch
    double normal_deviation = std::numeric_limits<double>::quiet_NaN();
};

/// Structure indicators of a triangulation: parallelogram deviations per
/// interior edge, the E1/E2 split, boundary vertex classes, and the fitted
/// closeness-to-uniform exponents.
struct MeshDiagnostics {
    int level = 0;
    double h = 0.0;
    std::vector<double> edge_delta;   // per edge; NaN on boundary edges
    std::vector<char> edge_in_e1;     // 1 = interior edge in E1
    int n_interior_edges = 0;
    int n_e1 = 0, n_e2 = 0;
    double e2_area = 0.0;   // sum over E2 edges of both adjacent element areas
    std::vector<BoundaryVertexInfo> boundary_vertices;
    int kappa = 0;   // |P_b^1|
    double alpha_estimate = std::numeric_limits<double>::infinity();
    double sigma_estimate = std::numeric_limits<double>::infinity();
    double log_uniformity = 1.0;
    double mean_delta_e1 = 0.0;
};

namespace detail {

/// Least-squares slope of y against x; NaN if underdetermined.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx < 1e-6) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

/// Edges of triangle t in boundary-walk order starting from local edge that
/// equals start_edge (traversed CCW, same direction as the domain boundary).
inline std::array<int, 3> walk_edges_from(const Mesh& m, int t, int start_edge) {
    // local edge i sits opposite vertex i and is traversed (i+1) -> (i+2)
    int k = 0;
    while (m.tri_edges[t][k] != start_edge) ++k;
    // following the CCW cycle of the triangle, the next side starts at the
    // endpoint (k+2): that side is opposite vertex (k+1)
    return {m.tri_edges[t][k], m.tri_edges[t][(k + 1) % 3], m.tri_edges[t][(k + 2) % 3]};
}

} // namespace detail

/// Compute the mesh diagnostics.  An interior edge lands in E1 when its scaled
/// parallelogram deviation satisfies delta_e <= h_e^threshold_alpha (C = 1);
/// a boundary vertex lands in P_b^2 when its two flanking boundary triangles
/// are translates of each other up to the same threshold.
inline MeshDiagnostics classify(const Mesh& m, double threshold_alpha = 1.0) {
    if (m.n_triangles() == 0) throw MeshError("classify: empty mesh");
    MeshDiagnostics d;
    d.level = m.refinement_level;
    d.h = m.h_max;
    d.edge_delta.assign(m.n_edges(), std::numeric_limits<double>::quiet_NaN());
    d.edge_in_e1.assign(m.n_edges(), 0);

    double delta_sum = 0.0;
    for (int e = 0; e < m.n_edges(); ++e) {
        const MeshEdge& ed = m.edges[e];
        if (ed.on_boundary) continue;
        ++d.n_interior_edges;
        auto apex = [&](int t) {
            for (int v : m.triangles[t])
                if (v != ed.a && v != ed.b) return v;
            return -1;
        };
        Vec2 pa = m.vertices[ed.a], pb = m.vertices[ed.b];
        Vec2 r1 = m.vertices[apex(ed.tri[0])], r2 = m.vertices[apex(ed.tri[1])];
        double d1 = std::abs((r1 - pa).norm() - (pb - r2).norm());
        double d2 = std::abs((r1 - pb).norm() - (pa - r2).norm());
        double delta = std::max(d1, d2) / ed.length;
        d.edge_delta[e] = delta;
        bool in_e1 = delta <= std::pow(ed.length, threshold_alpha);
        d.edge_in_e1[e] = in_e1 ? 1 : 0;
        if (in_e1) {
            ++d.n_e1;
            delta_sum += delta;
        } else {
            ++d.n_e2;
            d.e2_area += m.area(ed.tri[0]) + m.area(ed.tri[1]);
        }
    }
    d.mean_delta_e1 = d.n_e1 > 0 ? delta_sum / d.n_e1 : 0.0;

    // boundary vertices: identify the incoming/outgoing boundary edge of each
    std::vector<int> incoming(m.n_vertices(), -1), outgoing(m.n_vertices(), -1);
    for (int e = 0; e < m.n_edges(); ++e) {
        const MeshEdge& ed = m.edges[e];
        if (!ed.on_boundary) continue;
        Vec2 dvec = m.vertices[ed.b] - m.vertices[ed.a];
        bool a_to_b = rotate_cw(dvec).dot(ed.normal) > 0.0;
        int tail = a_to_b ? ed.a : ed.b;
        int head = a_to_b ? ed.b : ed.a;
        outgoing[tail] = e;
        incoming[head] = e;
    }
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (!m.vertex_on_boundary[v]) continue;
        BoundaryVertexInfo info;
        info.vertex = v;
        int el = incoming[v], er = outgoing[v];
        int kl = m.edges[el].tri[0], kr = m.edges[er].tri[0];
        info.tri_left = kl;
        info.tri_right = kr;
        if (kl != kr) {
            auto left = detail::walk_edges_from(m, kl, el);
            auto right = detail::walk_edges_from(m, kr, er);
            double hp = std::max(m.diameter(kl), m.diameter(kr));
            double dev = 0.0;
            for (int i = 0; i < 3; ++i)
                dev = std::max(dev, std::abs(m.edges[left[i]].length - m.edges[right[i]].length));
            info.deviation = dev / hp;
            info.normal_deviation = (m.edges[el].normal - m.edges[er].normal).norm();
            double thr = std::pow(hp, threshold_alpha);
            // a domain corner turns the boundary normal by a fixed angle, so the
            // normal test is capped; h^alpha alone exceeds 1 on coarse meshes
            double nthr = std::min(thr, 0.17);
            info.corner_like = !(info.deviation <= thr && info.normal_deviation <= nthr);
        }
        if (info.corner_like) ++d.kappa;
        d.boundary_vertices.push_back(info);
    }

    if (d.h > 0.0 && std::abs(std::log(d.h)) > 1e-12) {
        double worst = 0.0;
        for (int t = 0; t < m.n_triangles(); ++t)
            worst = std::max(worst, std::abs(std::log(m.diameter(t))));
        d.log_uniformity = worst / std::abs(std::log(d.h));
    }

    // single-mesh fit of log delta_e against log h_e over E1 (meaningful only
    // when the edge lengths actually spread; infinity marks an exact mesh)
    std::vector<double> lx, ly;
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!d.edge_in_e1[e] || d.edge_delta[e] <= 1e-10) continue;
        lx.push_back(std::log(m.edges[e].length));
        ly.push_back(std::log(d.edge_delta[e]));
    }
    if (lx.empty())
        d.alpha_estimate = std::numeric_limits<double>::infinity();
    else
        d.alpha_estimate = detail::ls_slope(lx, ly);
    if (d.n_e2 != 0) d.sigma_estimate = std::numeric_limits<double>::quiet_NaN();
    return d;
}

struct AlphaSigmaFit {
    double alpha = std::numeric_limits<double>::infinity();
    double sigma = std::numeric_limits<double>::infinity();
};

/// Fit the structure exponents across refinement levels: alpha from the mean
/// E1 deviation per level against h, sigma from the E2 area per level against
/// h.  Levels with exact zeros are skipped; all-zero data reports infinity.
inline AlphaSigmaFit fit_alpha_sigma(const std::vector<MeshDiagnostics>& levels) {
    AlphaSigmaFit fit;
    std::vector<double> lx, ly;
    for (const auto& d : levels) {
        if (d.mean_delta_e1 > 1e-10) {
            lx.push_back(std::log(d.h));
            ly.push_back(std::log(d.mean_delta_e1));
        }
    }
    if (!lx.empty()) fit.alpha = detail::ls_slope(lx, ly);
    lx.clear();
    ly.clear();
    for (const auto& d : levels) {
        if (d.e2_area > 0.0) {
            lx.push_back(std::log(d.h));
            ly.push_back(std::log(d.e2_area));
        }
    }
    if (!lx.empty()) fit.sigma = detail::ls_slope(lx, ly);
    return fit;
}

} // namespace scfem
