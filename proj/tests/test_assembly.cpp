#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <random>
#include <sstream>

using namespace scfem;
using testsupport::unit_square_two_triangles;

TEST_CASE("CR Poisson hand-assembly oracle on two triangles", "[assembly]") {
    Mesh m = unit_square_two_triangles();
    TriangleRule rule = triangle_rule(13);

    SECTION("f = 0: single dof, diagonal entry 8, zero solution") {
        DiscreteProblem p = assemble_cr_poisson(m, [](const Vec2&) { return 0.0; }, rule);
        REQUIRE(p.system.size() == 1);
        CHECK_THAT(p.system.matrix.coeff(0, 0), Catch::Matchers::WithinAbs(8.0, 1e-13));
        SolveResult s = solve(p.system);
        CHECK(s.x[0] == 0.0);
    }
    SECTION("f = 1: load 1/3, solution 1/24 at the diagonal midpoint") {
        DiscreteProblem p = assemble_cr_poisson(m, [](const Vec2&) { return 1.0; }, rule);
        CHECK_THAT(p.system.rhs[0], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-14));
        SolveResult s = solve(p.system);
        CHECK_THAT(s.x[0], Catch::Matchers::WithinAbs(1.0 / 24.0, 1e-13));
        PiecewiseField u = field_from_solution(p.primal, s.x);
        // the lone active dof is the interior (diagonal) edge
        for (int e = 0; e < m.n_edges(); ++e)
            if (!m.edges[e].on_boundary)
                CHECK_THAT(u.coeff(e), Catch::Matchers::WithinAbs(1.0 / 24.0, 1e-13));
    }
}

TEST_CASE("assembled matrices are exactly symmetric and positive definite", "[assembly]") {
    Mesh m = uniform_refine(testsupport::benchmark_parallelogram(2));
    TriangleRule rule = triangle_rule(13);
    auto f = [](const Vec2& p) { return std::sin(p.x()) + p.y(); };

    for (bool morley : {false, true}) {
        DiscreteProblem p = morley ? assemble_morley(m, f, MorleyRhs::Standard, rule)
                                   : assemble_cr_poisson(m, f, rule);
        Eigen::MatrixXd dense = p.system.matrix;
        CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("assembly is deterministic", "[assembly]") {
    Mesh m = uniform_refine(testsupport::benchmark_parallelogram(2));
    TriangleRule rule = triangle_rule(13);
    auto f = [](const Vec2& p) { return std::cos(3.0 * p.x() * p.y()); };
    DiscreteProblem a = assemble_morley(m, f, MorleyRhs::Standard, rule);
    DiscreteProblem b = assemble_morley(m, f, MorleyRhs::Standard, rule);
    REQUIRE(a.system.matrix.nonZeros() == b.system.matrix.nonZeros());
    for (int k = 0; k < a.system.matrix.nonZeros(); ++k)
        CHECK(a.system.matrix.valuePtr()[k] == b.system.matrix.valuePtr()[k]);
    CHECK(a.system.rhs == b.system.rhs);
}

TEST_CASE("Morley: zero load and Galerkin orthogonality", "[assembly]") {
    Mesh m = uniform_refine(unit_square_two_triangles());
    TriangleRule rule = triangle_rule(13);
    for (MorleyRhs mode : {MorleyRhs::Standard, MorleyRhs::Modified}) {
        DiscreteProblem p = assemble_morley(m, [](const Vec2&) { return 0.0; }, mode, rule);
        SolveResult s = solve(p.system);
        CHECK(s.x.lpNorm<Eigen::Infinity>() == 0.0);
    }
    auto f = [](const Vec2& p) { return p.x() - p.y() * p.y(); };
    for (bool cr : {false, true}) {
        DiscreteProblem p = cr ? assemble_cr_poisson(m, f, rule)
                               : assemble_morley(m, f, MorleyRhs::Standard, rule);
        SolveResult s = solve(p.system);
        double scale = p.system.rhs.lpNorm<Eigen::Infinity>();
        CHECK((p.system.matrix * s.x - p.system.rhs).lpNorm<Eigen::Infinity>() < 1e-12 * scale);
    }
}

TEST_CASE("Morley consistency for quadratic data", "[assembly]") {
    // interpolant of a global quadratic: the unconstrained stiffness applied to
    // it annihilates every row whose dof satisfies the boundary conditions
    Mesh m = uniform_refine(testsupport::benchmark_parallelogram(2));
    TriangleRule rule = triangle_rule(13);
    auto q = [](const Vec2& p) { return p.x() * p.x() - 0.5 * p.x() * p.y() + 2.0 * p.y() * p.y(); };
    auto dq = [](const Vec2& p) {
        return Vec2(2.0 * p.x() - 0.5 * p.y(), -0.5 * p.x() + 4.0 * p.y());
    };
    PiecewiseField qi = interp_morley(m, q, dq, edge_rule(9));
    DiscreteProblem full = assemble_morley(m, [](const Vec2&) { return 0.0; },
                                           MorleyRhs::Standard, rule, false);
    Eigen::VectorXd residual = full.system.matrix * qi.coeffs;
    DofMap masked = make_dofmap(m, ElementKind::Morley);   // default boundary conditions
    double scale = full.system.matrix.coeffs().abs().maxCoeff() *
                   qi.coeffs.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < masked.n_total; ++i)
        if (!masked.masked[i]) CHECK(std::abs(residual[i]) < 1e-13 * scale);
}

TEST_CASE("modified Morley load vanishes on edge dofs", "[assembly]") {
    Mesh m = uniform_refine(unit_square_two_triangles());
    TriangleRule rule = triangle_rule(13);
    auto f = [](const Vec2& p) { return 1.0 + p.x(); };
    DiscreteProblem p = assemble_morley(m, f, MorleyRhs::Modified, rule);
    const DofMap& dm = *p.primal;
    for (int e = 0; e < m.n_edges(); ++e) {
        int idx = dm.active_index[dm.edge_dof(e)];
        if (idx >= 0) CHECK_THAT(p.system.rhs[idx], Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("RT mixed system structure", "[assembly]") {
    Mesh m = uniform_refine(unit_square_two_triangles());   // 8 triangles
    TriangleRule rule = triangle_rule(13);

    SECTION("zero load gives the zero solution") {
        DiscreteProblem p = assemble_rt_mixed(m, [](const Vec2&) { return 0.0; }, rule);
        SolveResult s = solve(p.system);
        CHECK(s.x.lpNorm<Eigen::Infinity>() == 0.0);
    }
    SECTION("mass block SPD, constraint block of full row rank") {
        DiscreteProblem p = assemble_rt_mixed(m, [](const Vec2&) { return 1.0; }, rule);
        int ns = p.system.stress_size;
        int nt = m.n_triangles();
        Eigen::MatrixXd dense = p.system.matrix;
        Eigen::MatrixXd mass = dense.topLeftCorner(ns, ns);
        CHECK((mass - mass.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mass);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
        Eigen::MatrixXd constraint = dense.bottomLeftCorner(nt, ns);
        CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(constraint).rank() == nt);
    }
    SECTION("element means of div sigma match -f") {
        auto f = [](const Vec2& p) { return 1.0 + 2.0 * p.x() - p.y(); };
        DiscreteProblem p = assemble_rt_mixed(m, f, rule);
        SolveResult s = solve(p.system);
        PiecewiseField sigma = field_from_solution(p.primal, s.x);
        for (int t = 0; t < m.n_triangles(); ++t) {
            LocalBasis lb = local_basis(ElementKind::RT0, m, t);
            double div = eval_rt_divergence(sigma, lb, t);
            double fmean = integrate(m, t, rule, f) / m.area(t);
            CHECK_THAT(div, Catch::Matchers::WithinAbs(-fmean, 1e-11));
        }
    }
}

TEST_CASE("HHJ mixed system on a small mesh", "[assembly]") {
    Mesh m = uniform_refine(testsupport::benchmark_parallelogram(2));
    TriangleRule rule = triangle_rule(13);
    SECTION("zero load gives the zero solution") {
        DiscreteProblem p = assemble_hhj_mixed(m, [](const Vec2&) { return 0.0; }, rule);
        SolveResult s = solve(p.system);
        CHECK(s.x.lpNorm<Eigen::Infinity>() == 0.0);
    }
    SECTION("system is symmetric and solvable") {
        ExactSolution exact = plate_polynomial_solution();
        DiscreteProblem p = assemble_hhj_mixed(m, exact.f, rule);
        Eigen::MatrixXd dense = p.system.matrix;
        CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
        SolveResult s = solve(p.system);
        CHECK(s.residual < 1e-10);
    }
}

TEST_CASE("solver behavior", "[assembly]") {
    SECTION("identity system returns the right-hand side") {
        SparseSystem sys;
        sys.matrix.resize(3, 3);
        sys.matrix.setIdentity();
        sys.rhs = Eigen::Vector3d(1.0, -2.0, 0.25);
        SolveResult s = solve(sys);
        CHECK(s.x == sys.rhs);
        CHECK(s.residual == 0.0);
    }
    SECTION("singular system reports a solver failure") {
        SparseSystem sys;
        sys.matrix.resize(2, 2);
        std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}};
        sys.matrix.setFromTriplets(t.begin(), t.end());
        sys.rhs = Eigen::Vector2d(1.0, 1.0);
        CHECK_THROWS_AS(solve(sys), SolverError);
    }
    SECTION("iterative fallback matches the direct solve") {
        Mesh m = uniform_refine(unit_square_two_triangles());
        TriangleRule rule = triangle_rule(13);
        auto f = [](const Vec2& p) { return p.x() + p.y(); };
        DiscreteProblem p = assemble_cr_poisson(m, f, rule);
        Eigen::VectorXd direct = solve(p.system, false).x;
        Eigen::VectorXd iter = solve(p.system, true).x;
        CHECK((direct - iter).lpNorm<Eigen::Infinity>() <
              1e-10 * direct.lpNorm<Eigen::Infinity>());
        DiscreteProblem saddle = assemble_rt_mixed(m, f, rule);
        Eigen::VectorXd sd = solve(saddle.system, false).x;
        Eigen::VectorXd si = solve(saddle.system, true).x;
        CHECK((sd - si).lpNorm<Eigen::Infinity>() < 1e-8 * sd.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("matrix dump is parseable coordinate text", "[assembly]") {
    Mesh m = unit_square_two_triangles();
    TriangleRule rule = triangle_rule(13);
    DiscreteProblem p = assemble_cr_poisson(m, [](const Vec2&) { return 1.0; }, rule, false);
    dump_matrix(p.system, "./matrix_dump.txt");
    std::ifstream in("./matrix_dump.txt");
    REQUIRE(in.good());
    int i, j, count = 0;
    double v;
    while (in >> i >> j >> v) {
        CHECK(p.system.matrix.coeff(i, j) == v);
        ++count;
    }
    CHECK(count == p.system.matrix.nonZeros());
}
