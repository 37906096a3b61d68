#pragma once

#include "scfem/assembly.hpp"
#include "scfem/dofmap.hpp"
#include "scfem/polynomial.hpp"
#include "scfem/quadrature.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace scfem {

using VectorFn = std::function<Vec2(const Vec2&)>;
using MatrixFn = std::function<Mat2(const Vec2&)>;

/// Closed-form reference solution with everything the error norms need.
struct ExactSolution {
    std::string name;
    ScalarFn u;
    VectorFn grad;
    MatrixFn hess;
    ScalarFn f;
    std::vector<Vec2> domain;   // polygon corners, CCW
    bool plate = false;         // f = biharmonic of u (else f is the Poisson load)
};

/// Flux-preserving interpolation onto RT0: for every edge the integrated
/// normal flux of the result matches that of sigma.
inline PiecewiseField interp_rt(const Mesh& mesh, const VectorFn& sigma,
                                const EdgeRule& erule) {
    PiecewiseField out(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::RT0)));
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& ed = mesh.edges[e];
        const Vec2& a = mesh.vertices[ed.a];
        const Vec2& b = mesh.vertices[ed.b];
        out.coeff(e) = integrate_edge(a, b, erule,
                                      [&](const Vec2& x) { return sigma(x).dot(ed.normal); });
    }
    return out;
}

/// nn-trace-preserving interpolation onto HHJ0: for every edge the integrated
/// normal-normal component of the result matches that of tau.
inline PiecewiseField interp_hhj(const Mesh& mesh, const MatrixFn& tau, const EdgeRule& erule) {
    PiecewiseField out(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::HHJ0)));
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& ed = mesh.edges[e];
        const Vec2& a = mesh.vertices[ed.a];
        const Vec2& b = mesh.vertices[ed.b];
        const Vec2& n = ed.normal;
        out.coeff(e) =
            integrate_edge(a, b, erule, [&](const Vec2& x) { return n.dot(tau(x) * n); });
    }
    return out;
}

/// Vertex interpolation onto continuous P1 with zero boundary values.
inline PiecewiseField interp_p1_vertices(const Mesh& mesh, const ScalarFn& v) {
    PiecewiseField out(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::P1C0)));
    for (int z = 0; z < mesh.n_vertices(); ++z)
        if (!mesh.vertex_on_boundary[z]) out.coeff(z) = v(mesh.vertices[z]);
    return out;
}

/// Vertex interpolation of a Morley field (vertex dofs are shared, so the
/// values are read off directly).
inline PiecewiseField interp_p1_vertices(const PiecewiseField& morley) {
    if (morley.kind() != ElementKind::Morley)
        throw std::invalid_argument("interp_p1_vertices: expected a Morley field");
    const Mesh& mesh = morley.mesh();
    PiecewiseField out(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::P1C0)));
    for (int z = 0; z < mesh.n_vertices(); ++z)
        if (!mesh.vertex_on_boundary[z]) out.coeff(z) = morley.coeff(morley.dofmap->vertex_dof(z));
    return out;
}

/// Edge-mean interpolation onto CR (no boundary conditions applied).
inline PiecewiseField interp_cr(const Mesh& mesh, const ScalarFn& u, const EdgeRule& erule) {
    PiecewiseField out(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::CR)));
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& ed = mesh.edges[e];
        out.coeff(e) =
            integrate_edge(mesh.vertices[ed.a], mesh.vertices[ed.b], erule, u) / ed.length;
    }
    return out;
}

/// Canonical Morley interpolant: vertex values of u plus edge means of the
/// normal derivative (taken with the global edge normals), without masking.
inline PiecewiseField interp_morley(const Mesh& mesh, const ScalarFn& u, const VectorFn& grad,
                                    const EdgeRule& erule) {
    auto dm = std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::Morley, 0));
    PiecewiseField out(dm);
    for (int z = 0; z < mesh.n_vertices(); ++z) out.coeff(dm->vertex_dof(z)) = u(mesh.vertices[z]);
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& ed = mesh.edges[e];
        double mean = integrate_edge(mesh.vertices[ed.a], mesh.vertices[ed.b], erule,
                                     [&](const Vec2& x) { return grad(x).dot(ed.normal); }) /
                      ed.length;
        out.coeff(dm->edge_dof(e)) = mean;
    }
    return out;
}

namespace detail {

struct PlatePolynomials {
    Poly2 u, ux, uy, uxx, uxy, uyy, f;
};

inline const PlatePolynomials& plate_polynomials() {
    static const PlatePolynomials P = [] {
        const double r3 = std::sqrt(3.0);
        Poly2 a = Poly2::linear(-r3, 1.0, 0.0);          // x2 - sqrt(3) x1
        Poly2 b = Poly2::linear(-r3, 1.0, 2.0 * r3);     // x2 - sqrt(3) x1 + 2 sqrt(3)
        Poly2 c = Poly2::linear(0.0, 1.0, 0.0);          // x2
        Poly2 d = Poly2::linear(0.0, -1.0, r3);          // sqrt(3) - x2
        Poly2 u = a * a * b * b * c * c * d * d;
        PlatePolynomials out;
        out.u = u;
        out.ux = u.dx();
        out.uy = u.dy();
        out.uxx = out.ux.dx();
        out.uxy = out.ux.dy();
        out.uyy = out.uy.dy();
        Poly2 lap = out.uxx + out.uyy;
        out.f = lap.dx().dx() + lap.dy().dy();   // biharmonic of u
        return out;
    }();
    return P;
}

} // namespace detail

/// The clamped-plate benchmark: a degree-8 polynomial on the parallelogram with
/// corners (0,0), (2,0), (3,sqrt 3), (1,sqrt 3), vanishing together with its
/// normal derivative on the whole boundary; f is its biharmonic.
inline ExactSolution plate_polynomial_solution() {
    const double r3 = std::sqrt(3.0);
    const auto& P = detail::plate_polynomials();
    ExactSolution s;
    s.name = "plate-polynomial";
    s.plate = true;
    s.u = [&P](const Vec2& x) { return P.u(x); };
    s.grad = [&P](const Vec2& x) { return Vec2(P.ux(x), P.uy(x)); };
    s.hess = [&P](const Vec2& x) {
        Mat2 h;
        h << P.uxx(x), P.uxy(x), P.uxy(x), P.uyy(x);
        return h;
    };
    s.f = [&P](const Vec2& x) { return P.f(x); };
    s.domain = {Vec2(0, 0), Vec2(2, 0), Vec2(3, r3), Vec2(1, r3)};
    return s;
}

/// Manufactured Poisson benchmark on the unit square: u = sin(pi x) sin(pi y),
/// f = 2 pi^2 u = -lap u.
inline ExactSolution poisson_sine_solution() {
    ExactSolution s;
    s.name = "poisson-sine";
    s.u = [](const Vec2& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); };
    s.grad = [](const Vec2& p) {
        return Vec2(M_PI * std::cos(M_PI * p.x()) * std::sin(M_PI * p.y()),
                    M_PI * std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()));
    };
    s.hess = [](const Vec2& p) {
        double s2 = M_PI * M_PI;
        double ss = std::sin(M_PI * p.x()) * std::sin(M_PI * p.y());
        double cc = std::cos(M_PI * p.x()) * std::cos(M_PI * p.y());
        Mat2 h;
        h << -s2 * ss, s2 * cc, s2 * cc, -s2 * ss;
        return h;
    };
    s.f = [](const Vec2& p) {
        return 2.0 * M_PI * M_PI * std::sin(M_PI * p.x()) * std::sin(M_PI * p.y());
    };
    s.domain = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    return s;
}

/// Polynomial Poisson benchmark on the parallelogram domain: the product of the
/// four boundary lines (degree 4, vanishing on the boundary), f = -lap u.
inline ExactSolution poisson_polynomial_solution() {
    const double r3 = std::sqrt(3.0);
    struct Polys {
        Poly2 u, ux, uy, uxx, uxy, uyy, f;
    };
    static const Polys P = [] {
        const double s3 = std::sqrt(3.0);
        Poly2 a = Poly2::linear(-s3, 1.0, 0.0);
        Poly2 b = Poly2::linear(-s3, 1.0, 2.0 * s3);
        Poly2 c = Poly2::linear(0.0, 1.0, 0.0);
        Poly2 d = Poly2::linear(0.0, -1.0, s3);
        Polys out;
        out.u = a * b * c * d;
        out.ux = out.u.dx();
        out.uy = out.u.dy();
        out.uxx = out.ux.dx();
        out.uxy = out.ux.dy();
        out.uyy = out.uy.dy();
        out.f = (out.uxx + out.uyy) * (-1.0);
        return out;
    }();
    ExactSolution s;
    s.name = "poisson-polynomial";
    s.u = [](const Vec2& x) { return P.u(x); };
    s.grad = [](const Vec2& x) { return Vec2(P.ux(x), P.uy(x)); };
    s.hess = [](const Vec2& x) {
        Mat2 h;
        h << P.uxx(x), P.uxy(x), P.uxy(x), P.uyy(x);
        return h;
    };
    s.f = [](const Vec2& x) { return P.f(x); };
    s.domain = {Vec2(0, 0), Vec2(2, 0), Vec2(3, r3), Vec2(1, r3)};
    return s;
}

} // namespace scfem
