#pragma once

#include "scfem/mesh.hpp"
#include "scfem/types.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace scfem {

/// Quadrature on the reference triangle (0,0),(1,0),(0,1), stored in
/// barycentric coordinates.  Weights are positive and sum to 1/2.
struct TriangleRule {
    std::vector<Eigen::Vector3d> points;   // (l0, l1, l2)
    std::vector<double> weights;
    int exactness_degree = 0;

    int size() const { return static_cast<int>(points.size()); }

    Vec2 map_to(const Mesh& m, int t, int q) const {
        const Eigen::Vector3d& l = points[q];
        return l[0] * m.vertex(t, 0) + l[1] * m.vertex(t, 1) + l[2] * m.vertex(t, 2);
    }

    Vec2 map_to(const std::array<Vec2, 3>& v, int q) const {
        const Eigen::Vector3d& l = points[q];
        return l[0] * v[0] + l[1] * v[1] + l[2] * v[2];
    }

    /// Physical weight on a triangle of area |K|: w_q * 2|K|.
    double physical_weight(double area, int q) const { return weights[q] * 2.0 * area; }
};

/// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct EdgeRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int exactness_degree = 0;

    int size() const { return static_cast<int>(nodes.size()); }

    Vec2 map_to(const Vec2& a, const Vec2& b, int q) const { return a + nodes[q] * (b - a); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_m.
inline void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(m, 0.0);
    weights.assign(m, 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes[i] = 0.5 * (1.0 - x);          // descending x maps to ascending t
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
}

} // namespace detail

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree <= degree.
inline EdgeRule edge_rule(int degree) {
    if (degree < 1 || degree > 30)
        throw std::invalid_argument("edge_rule: unsupported degree " + std::to_string(degree));
    EdgeRule r;
    int m = (degree + 2) / 2;   // ceil((degree+1)/2)
    detail::gauss_legendre_01(m, r.nodes, r.weights);
    r.exactness_degree = 2 * m - 1;
    return r;
}

/// Symmetric rule on the reference triangle, exact for total degree <= degree.
///
/// Degrees 1 and 2 are the classical centroid and edge-midpoint rules.  Higher
/// degrees use a conical product of Gauss-Legendre rules (the (1-x) radial
/// factor folded into the weights) symmetrized over all six permutations of the
/// barycentric coordinates, which keeps every weight positive.
inline TriangleRule triangle_rule(int degree) {
    if (degree < 1 || degree > 14)
        throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
    TriangleRule r;
    r.exactness_degree = degree;
    if (degree == 1) {
        r.points = {Eigen::Vector3d(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)};
        r.weights = {0.5};
        return r;
    }
    if (degree == 2) {
        r.points = {Eigen::Vector3d(0.5, 0.5, 0.0), Eigen::Vector3d(0.0, 0.5, 0.5),
                    Eigen::Vector3d(0.5, 0.0, 0.5)};
        r.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
        return r;
    }
    std::vector<double> xi, wxi, eta, weta;
    detail::gauss_legendre_01((degree + 3) / 2, xi, wxi);     // handles degree+1 in x
    detail::gauss_legendre_01((degree + 2) / 2, eta, weta);   // handles degree in eta
    static const int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                   {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    for (std::size_t i = 0; i < xi.size(); ++i) {
        for (std::size_t j = 0; j < eta.size(); ++j) {
            double x = xi[i];
            double y = eta[j] * (1.0 - xi[i]);
            double w = wxi[i] * (1.0 - xi[i]) * weta[j];   // masses sum to 1/2
            Eigen::Vector3d l(1.0 - x - y, x, y);
            for (const auto& p : perm) {
                r.points.emplace_back(l[p[0]], l[p[1]], l[p[2]]);
                r.weights.push_back(w / 6.0);
            }
        }
    }
    return r;
}

/// Integrate f over element t of the mesh.
template <class F>
double integrate(const Mesh& m, int t, const TriangleRule& rule, F&& f) {
    double s = 0.0;
    double a = m.area(t);
    for (int q = 0; q < rule.size(); ++q) s += rule.physical_weight(a, q) * f(rule.map_to(m, t, q));
    return s;
}

/// Integrate f ds over the straight segment [a, b].
template <class F>
double integrate_edge(const Vec2& a, const Vec2& b, const EdgeRule& rule, F&& f) {
    double s = 0.0;
    double len = (b - a).norm();
    for (int q = 0; q < rule.size(); ++q) s += len * rule.weights[q] * f(rule.map_to(a, b, q));
    return s;
}

} // namespace scfem
