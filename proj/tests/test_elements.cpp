#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace scfem;

namespace {

std::array<Vec2, 3> random_triangle(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (;;) {
        std::array<Vec2, 3> v = {Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng))};
        double area = 0.5 * cross2(v[1] - v[0], v[2] - v[0]);
        double h = std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
        if (area > 0.05 * h * h) return v;   // keep the shapes non-degenerate
    }
}

/// Independent dof functionals via quadrature; the oracle for the Kronecker
/// property.
double apply_dof(const LocalBasis& lb, int j, int i) {
    EdgeRule er = edge_rule(9);
    auto edge_ends = [&](int k) {
        return std::pair<Vec2, Vec2>(lb.verts[(k + 1) % 3], lb.verts[(k + 2) % 3]);
    };
    switch (lb.kind) {
        case ElementKind::P0: return lb.value(i, (lb.verts[0] + lb.verts[1] + lb.verts[2]) / 3.0);
        case ElementKind::P1C:
        case ElementKind::P1C0: return lb.value(i, lb.verts[j]);
        case ElementKind::CR:
        case ElementKind::CR0: {
            auto [a, b] = edge_ends(j);
            return integrate_edge(a, b, er, [&](const Vec2& x) { return lb.value(i, x); }) /
                   lb.edge_lengths[j];
        }
        case ElementKind::Morley: {
            if (j < 3) return lb.value(i, lb.verts[j]);
            auto [a, b] = edge_ends(j - 3);
            return integrate_edge(a, b, er,
                                  [&](const Vec2& x) {
                                      return lb.gradient(i, x).dot(lb.edge_normals[j - 3]);
                                  }) /
                   lb.edge_lengths[j - 3];
        }
        case ElementKind::RT0: {
            auto [a, b] = edge_ends(j);
            return integrate_edge(a, b, er, [&](const Vec2& x) {
                return lb.rt_value(i, x).dot(lb.edge_normals[j]);
            });
        }
        case ElementKind::HHJ0: {
            auto [a, b] = edge_ends(j);
            const Vec2& n = lb.edge_normals[j];
            return integrate_edge(a, b, er,
                                  [&](const Vec2&) { return n.dot(lb.hhj_value(i) * n); });
        }
    }
    return 0.0;
}

} // namespace

TEST_CASE("Kronecker property on random triangles", "[elements]") {
    std::mt19937 rng(42);
    for (ElementKind kind : {ElementKind::CR, ElementKind::Morley, ElementKind::RT0,
                             ElementKind::HHJ0, ElementKind::P1C, ElementKind::P0}) {
        for (int rep = 0; rep < 20; ++rep) {
            LocalBasis lb = local_basis(kind, random_triangle(rng));
            for (int j = 0; j < lb.ndof(); ++j)
                for (int i = 0; i < lb.ndof(); ++i)
                    CHECK_THAT(apply_dof(lb, j, i),
                               Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
        }
    }
}

TEST_CASE("degenerate triangle is rejected", "[elements]") {
    CHECK_THROWS_AS(local_basis(ElementKind::CR, {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}),
                    std::invalid_argument);
}

TEST_CASE("CR basis on the unit right triangle", "[elements]") {
    LocalBasis lb = local_basis(ElementKind::CR, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    // dof 0 sits on the hypotenuse (opposite vertex 0); basis is 1 - 2*l0
    Vec2 x(0.3, 0.4);
    CHECK(lb.value(0, x) == Catch::Approx(1.0 - 2.0 * (1.0 - 0.3 - 0.4)).epsilon(1e-14));
    CHECK(lb.gradient(0, x).x() == Catch::Approx(2.0));
    CHECK(lb.gradient(0, x).y() == Catch::Approx(2.0));
    CHECK(lb.hessian(0, x) == Mat2::Zero());   // exact zero for P1
}

TEST_CASE("RT0 basis matches the geometric formula", "[elements]") {
    LocalBasis lb = local_basis(ElementKind::RT0, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    // hypotenuse dof: the unit-normal-density shape |e| * phi_0 = sqrt(2) (x, y)
    double len = std::sqrt(2.0);
    for (const Vec2& x : {Vec2(0.2, 0.3), Vec2(0.5, 0.5), Vec2(0.1, 0.05)}) {
        Vec2 v = len * lb.rt_value(0, x);
        CHECK(v.x() == Catch::Approx(std::sqrt(2.0) * x.x()).margin(1e-14));
        CHECK(v.y() == Catch::Approx(std::sqrt(2.0) * x.y()).margin(1e-14));
    }
    // normal component 1 on its own edge, 0 on the legs
    Vec2 hyp_mid(0.5, 0.5), n_hyp = Vec2(1, 1).normalized();
    CHECK((len * lb.rt_value(0, hyp_mid)).dot(n_hyp) == Catch::Approx(1.0));
    CHECK((len * lb.rt_value(0, Vec2(0.4, 0.0))).dot(Vec2(0, -1)) ==
          Catch::Approx(0.0).margin(1e-14));
    CHECK((len * lb.rt_value(0, Vec2(0.0, 0.4))).dot(Vec2(-1, 0)) ==
          Catch::Approx(0.0).margin(1e-14));
    // divergence of the unit-flux-density shape: 2/d = |e|/|K|
    double area = 0.5;
    CHECK(len * lb.rt_divergence(0) == Catch::Approx(len / area).epsilon(1e-14));
}

TEST_CASE("HHJ0 basis normal-normal traces", "[elements]") {
    std::mt19937 rng(11);
    LocalBasis lb = local_basis(ElementKind::HHJ0, random_triangle(rng));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Vec2& n = lb.edge_normals[j];
            double nn = n.dot(lb.hhj_value(i) * n) * lb.edge_lengths[j];
            CHECK_THAT(nn, Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
        }
    }
}

TEST_CASE("Morley element reproduces quadratics", "[elements]") {
    Mesh m = testsupport::unit_square_two_triangles();
    auto u = [](const Vec2& p) { return p.x() * p.x(); };
    auto grad = [](const Vec2& p) { return Vec2(2.0 * p.x(), 0.0); };
    PiecewiseField f = interp_morley(m, u, grad, edge_rule(9));
    for (int t = 0; t < m.n_triangles(); ++t) {
        LocalBasis lb = local_basis(ElementKind::Morley, m, t);
        Vec2 x = m.centroid(t) + Vec2(0.05, -0.03);
        CHECK(eval_value(f, lb, t, x)[0] == Catch::Approx(u(x)).margin(1e-12));
        Mat2 h = eval_hessian(f, lb, t, x);
        CHECK(h(0, 0) == Catch::Approx(2.0).margin(1e-12));
        CHECK(h(0, 1) == Catch::Approx(0.0).margin(1e-12));
        CHECK(h(1, 1) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("patch tests: each family reproduces its natural fields", "[elements]") {
    Mesh m = testsupport::jitter_interior(
        generate_structured(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), 4), 0.02, 3);
    EdgeRule er = edge_rule(9);
    TriangleRule tr = triangle_rule(4);

    SECTION("CR reproduces affine functions") {
        auto u = [](const Vec2& p) { return 2.0 * p.x() - 3.0 * p.y() + 0.5; };
        PiecewiseField f = interp_cr(m, u, er);
        for (int t = 0; t < m.n_triangles(); ++t) {
            LocalBasis lb = local_basis(ElementKind::CR, m, t);
            for (int q = 0; q < tr.size(); ++q) {
                Vec2 x = tr.map_to(m, t, q);
                CHECK(eval_value(f, lb, t, x)[0] == Catch::Approx(u(x)).margin(1e-12));
            }
        }
    }
    SECTION("RT0 reproduces constants and x P0") {
        PiecewiseField c = interp_rt(m, [](const Vec2&) { return Vec2(1.0, 0.0); }, er);
        PiecewiseField lin = interp_rt(m, [](const Vec2& p) { return Vec2(p); }, er);
        for (int t = 0; t < m.n_triangles(); ++t) {
            LocalBasis lb = local_basis(ElementKind::RT0, m, t);
            Vec2 x = m.centroid(t) + Vec2(0.01, 0.02);
            CHECK((eval_rt_value(c, lb, t, x) - Vec2(1, 0)).norm() < 1e-12);
            CHECK((eval_rt_value(lin, lb, t, x) - x).norm() < 1e-12);
        }
    }
    SECTION("HHJ0 reproduces constant symmetric matrices") {
        Mat2 c;
        c << 1.5, -0.25, -0.25, 0.75;
        PiecewiseField f = interp_hhj(m, [&](const Vec2&) { return c; }, er);
        for (int t = 0; t < m.n_triangles(); ++t) {
            LocalBasis lb = local_basis(ElementKind::HHJ0, m, t);
            CHECK((eval_hhj_value(f, lb, t) - c).norm() < 1e-12);
        }
    }
}

TEST_CASE("field evaluation guards", "[elements]") {
    Mesh m = testsupport::unit_square_two_triangles();
    PiecewiseField f(std::make_shared<DofMap>(make_dofmap(m, ElementKind::CR)));
    f.coeffs.setOnes();
    LocalBasis lb = local_basis(ElementKind::CR, m, 0);
    // constant-one CR field: value 1, gradient 0
    CHECK(eval_value(f, lb, 0, Vec2(0.5, 0.25), true)[0] == Catch::Approx(1.0));
    CHECK(eval_gradient(f, lb, 0, Vec2(0.5, 0.25)).norm() < 1e-14);
    CHECK_THROWS_AS(eval_value(f, lb, 0, Vec2(-0.5, 0.25), true), std::invalid_argument);
}

TEST_CASE("HHJ0 nn-trace is continuous across interior edges", "[elements]") {
    Mesh m = uniform_refine(testsupport::benchmark_parallelogram(2));
    auto dm = std::make_shared<DofMap>(make_dofmap(m, ElementKind::HHJ0));
    PiecewiseField f(dm);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int e = 0; e < m.n_edges(); ++e) f.coeff(e) = u(rng);
    for (int e = 0; e < m.n_edges(); ++e) {
        const MeshEdge& ed = m.edges[e];
        if (ed.on_boundary) continue;
        LocalBasis lb1 = local_basis(ElementKind::HHJ0, m, ed.tri[0]);
        LocalBasis lb2 = local_basis(ElementKind::HHJ0, m, ed.tri[1]);
        double nn1 = ed.normal.dot(eval_hhj_value(f, lb1, ed.tri[0]) * ed.normal);
        double nn2 = ed.normal.dot(eval_hhj_value(f, lb2, ed.tri[1]) * ed.normal);
        CHECK_THAT(nn1 - nn2, Catch::Matchers::WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("Morley edge dof agrees from both sides of an edge", "[elements]") {
    Mesh m = uniform_refine(testsupport::unit_square_two_triangles());
    auto dm = std::make_shared<DofMap>(make_dofmap(m, ElementKind::Morley, 0));
    PiecewiseField f(dm);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < dm->n_total; ++i) f.coeff(i) = u(rng);
    EdgeRule er = edge_rule(9);
    for (int e = 0; e < m.n_edges(); ++e) {
        const MeshEdge& ed = m.edges[e];
        if (ed.on_boundary) continue;
        double mean[2];
        for (int s = 0; s < 2; ++s) {
            int t = ed.tri[s];
            LocalBasis lb = local_basis(ElementKind::Morley, m, t);
            mean[s] = integrate_edge(m.vertices[ed.a], m.vertices[ed.b], er,
                                     [&](const Vec2& x) {
                                         Vec2 g = eval_gradient(f, lb, t, x).row(0).transpose();
                                         return g.dot(ed.normal);
                                     }) /
                      ed.length;
        }
        CHECK_THAT(mean[0] - mean[1], Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(mean[0] - f.coeff(dm->edge_dof(e)), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
}
