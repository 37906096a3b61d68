#pragma once

// Shared helpers for the test binaries: small canonical meshes, seeded random
// generators, and the synthetic boundary-pair patches used by the patch
// identity checks.

#include "scfem/scfem.hpp"

#include <random>
#include <string>
#include <vector>

namespace testsupport {

using namespace scfem;

/// Unit square split by one diagonal: the smallest conforming mesh.
inline Mesh unit_square_two_triangles() {
    return make_mesh({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)},
                     {{0, 1, 2}, {0, 2, 3}});
}

inline Mesh unit_right_triangle() {
    return make_mesh({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}});
}

/// Trapezoid patch of three elements whose left and right triangles are exact
/// translates flanking the midpoint vertex of the long side; the configuration
/// of the boundary pairs (K_p^l, K_p^r).  Scaled by h; the right triangle's
/// free vertices can be displaced to break the translation symmetry.
inline Mesh trapezoid_patch(double h, const Vec2& perturb_b2 = Vec2::Zero(),
                            const Vec2& perturb_t1 = Vec2::Zero()) {
    Vec2 b0(0, 0), p(h, 0), b2(2 * h, 0), t0(0.5 * h, h), t1(1.5 * h, h);
    b2 += perturb_b2;
    t1 += perturb_t1;
    return make_mesh({b0, p, b2, t0, t1}, {{0, 1, 3}, {1, 4, 3}, {1, 2, 4}});
}

/// Displace interior vertices by a uniform jitter of the given amplitude.
inline Mesh jitter_interior(const Mesh& m, double amplitude, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    std::vector<Vec2> verts = m.vertices;
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (m.vertex_on_boundary[v]) continue;
        verts[v] += Vec2(u(rng), u(rng));
    }
    return make_mesh(std::move(verts), m.triangles);
}

inline Mesh benchmark_parallelogram(int n) {
    return generate_structured(Vec2(0, 0), Vec2(2, 0), Vec2(1, std::sqrt(3.0)), n);
}

inline Mesh benchmark_parallelogram_piecewise(int n) {
    return generate_piecewise_uniform(Vec2(0, 0), Vec2(2, 0), Vec2(1, std::sqrt(3.0)), n);
}

/// Random linear vector field tau(x) = A x + b.
inline VectorFn random_linear_vector_field(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat2 a;
    a << u(rng), u(rng), u(rng), u(rng);
    Vec2 b(u(rng), u(rng));
    return [a, b](const Vec2& x) { return Vec2(a * x + b); };
}

/// Random linear symmetric-matrix field tau(x) = T0 + x1 H1 + x2 H2.
inline MatrixFn random_linear_matrix_field(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto sym = [&] {
        Mat2 s;
        double d = u(rng);
        s << u(rng), d, d, u(rng);
        return s;
    };
    Mat2 t0 = sym(), h1 = sym(), h2 = sym();
    return [t0, h1, h2](const Vec2& x) { return Mat2(t0 + x.x() * h1 + x.y() * h2); };
}

/// Componentwise integral of tau - Pi tau over one element (2x2 result).
template <class EvalInterp>
Mat2 interpolation_defect(const Mesh& m, int t, const MatrixFn& tau, EvalInterp&& interp_value,
                          const TriangleRule& rule) {
    Mat2 acc = Mat2::Zero();
    double a = m.area(t);
    for (int q = 0; q < rule.size(); ++q) {
        Vec2 x = rule.map_to(m, t, q);
        acc += rule.physical_weight(a, q) * Mat2(tau(x) - interp_value(t, x));
    }
    return acc;
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
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
    return sxy / sxx;
}

} // namespace testsupport
