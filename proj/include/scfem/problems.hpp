#pragma once

#include "scfem/assembly.hpp"
#include "scfem/interpolation.hpp"
#include "scfem/postprocess.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace scfem {

/// L2 distance of two ncomp-valued piecewise functions given by per-element
/// evaluators (matrix values flattened, so the pointwise norm is Frobenius).
inline double l2_error(const Mesh& mesh, const TriangleRule& rule, int ncomp,
                       const ComponentEvaluator& a, const ComponentEvaluator& b) {
    std::vector<double> va(ncomp), vb(ncomp);
    double acc = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        double area = mesh.area(t);
        for (int q = 0; q < rule.size(); ++q) {
            Vec2 x = rule.map_to(mesh, t, q);
            a(t, x, va.data());
            b(t, x, vb.data());
            double d2 = 0.0;
            for (int c = 0; c < ncomp; ++c) {
                double d = va[c] - vb[c];
                d2 += d * d;
            }
            acc += rule.physical_weight(area, q) * d2;
        }
    }
    return std::sqrt(acc);
}

/// L2 norm of a single evaluator.
inline double l2_norm(const Mesh& mesh, const TriangleRule& rule, int ncomp,
                      const ComponentEvaluator& a) {
    return l2_error(mesh, rule, ncomp, a,
                    [ncomp](int, const Vec2&, double* out) {
                        for (int c = 0; c < ncomp; ++c) out[c] = 0.0;
                    });
}

// ---- evaluator adapters ---------------------------------------------------

inline ComponentEvaluator eval_of(const ScalarFn& f) {
    return [f](int, const Vec2& x, double* out) { out[0] = f(x); };
}

inline ComponentEvaluator eval_of(const VectorFn& f) {
    return [f](int, const Vec2& x, double* out) {
        Vec2 v = f(x);
        out[0] = v.x();
        out[1] = v.y();
    };
}

inline ComponentEvaluator eval_of(const MatrixFn& f) {
    return [f](int, const Vec2& x, double* out) {
        Mat2 m = f(x);
        out[0] = m(0, 0);
        out[1] = m(0, 1);
        out[2] = m(1, 0);
        out[3] = m(1, 1);
    };
}

/// Values of a scalar-family field (ncomp components as stored).
inline ComponentEvaluator field_value_eval(const PiecewiseField& f) {
    const Mesh* mesh = &f.mesh();
    return [&f, mesh](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(f.kind(), *mesh, t);
        Eigen::VectorXd v = eval_value(f, lb, t, x);
        for (int c = 0; c < f.ncomp; ++c) out[c] = v[c];
    };
}

/// Broken gradient of a scalar field: 2 components.
inline ComponentEvaluator field_gradient_eval(const PiecewiseField& f) {
    const Mesh* mesh = &f.mesh();
    return [&f, mesh](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(f.kind(), *mesh, t);
        Eigen::MatrixXd g = eval_gradient(f, lb, t, x);
        out[0] = g(0, 0);
        out[1] = g(0, 1);
    };
}

/// Broken hessian of a scalar field: 4 components, row-major.
inline ComponentEvaluator field_hessian_eval(const PiecewiseField& f) {
    const Mesh* mesh = &f.mesh();
    return [&f, mesh](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(f.kind(), *mesh, t);
        Mat2 h = eval_hessian(f, lb, t, x);
        out[0] = h(0, 0);
        out[1] = h(0, 1);
        out[2] = h(1, 0);
        out[3] = h(1, 1);
    };
}

inline ComponentEvaluator rt_value_eval(const PiecewiseField& f) {
    const Mesh* mesh = &f.mesh();
    return [&f, mesh](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(ElementKind::RT0, *mesh, t);
        Vec2 v = eval_rt_value(f, lb, t, x);
        out[0] = v.x();
        out[1] = v.y();
    };
}

inline ComponentEvaluator hhj_value_eval(const PiecewiseField& f) {
    const Mesh* mesh = &f.mesh();
    return [&f, mesh](int t, const Vec2&, double* out) {
        LocalBasis lb = local_basis(ElementKind::HHJ0, *mesh, t);
        Mat2 v = eval_hhj_value(f, lb, t);
        out[0] = v(0, 0);
        out[1] = v(0, 1);
        out[2] = v(1, 0);
        out[3] = v(1, 1);
    };
}

/// Symmetric 3-component CR storage (m11, m12, m22) widened to 4 components.
inline ComponentEvaluator sym_field_matrix_eval(const PiecewiseField& f) {
    const Mesh* mesh = &f.mesh();
    return [&f, mesh](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(f.kind(), *mesh, t);
        Eigen::VectorXd v = eval_value(f, lb, t, x);
        out[0] = v[0];
        out[1] = v[1];
        out[2] = v[1];
        out[3] = v[2];
    };
}

// ---- case drivers -----------------------------------------------------------

struct CaseOptions {
    int quad_degree = 13;   // volume rule for norms and load vectors
    int edge_degree = 9;    // edge rule for interpolation dofs
    bool postprocess = true;
    bool iterative = false;
};

/// One refinement level's results.  Norm semantics:
///   Poisson: primal = |grad u - grad_h u_CR|, gap = |sigma_RT - Pi_RT sigma|,
///            post = |grad u - K_h grad_h u_CR|
///   plate:   primal = |hess u - hess_h u_M|, gap = |hess_h u_M - Pi_HHJ hess u|,
///            post = |hess u - K_h hess_h u_M|
struct CaseResult {
    int level = 0;
    double h = 0.0;
    std::map<std::string, int> dofs;
    double error_primal = std::numeric_limits<double>::quiet_NaN();
    double error_interp_gap = std::numeric_limits<double>::quiet_NaN();
    double error_postprocessed = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> residuals;
    double seconds = 0.0;

    // structural extras, populated when the involved methods were run
    double equivalence_stress_gap = std::numeric_limits<double>::quiet_NaN();
    double equivalence_displacement_gap = std::numeric_limits<double>::quiet_NaN();
    double morley_mode_gap = std::numeric_limits<double>::quiet_NaN();

    double max_residual() const {
        double r = 0.0;
        for (const auto& [k, v] : residuals)
            if (k.rfind("solver", 0) == 0) r = std::max(r, v);
        return r;
    }
};

struct PoissonMethods {
    bool cr = true;
    bool rt = true;
};

struct PoissonRun {
    CaseResult result;
    std::optional<PiecewiseField> u_cr, sigma_rt, pi_rt_sigma, recovered_gradient;
};

struct PlateMethods {
    bool morley = true;
    bool morley_modified = false;
    bool hhj = false;
};

struct PlateRun {
    CaseResult result;
    std::optional<PiecewiseField> u_morley, u_morley_modified, sigma_hhj, u_hhj, pi_hhj_hess,
        recovered_hessian;
};

namespace detail {

inline void check_dirichlet_compatible(const Mesh& mesh, const ExactSolution& exact,
                                       bool need_normal_derivative) {
    double scale = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t)
        scale = std::max(scale, std::abs(exact.u(mesh.centroid(t))));
    double tol = 1e-9 * (1.0 + scale);
    for (const auto& e : mesh.edges) {
        if (!e.on_boundary) continue;
        for (const Vec2& x : {mesh.vertices[e.a], e.midpoint, mesh.vertices[e.b]}) {
            if (std::abs(exact.u(x)) > tol)
                throw std::invalid_argument("incompatible boundary data: u does not vanish on "
                                            "the boundary");
            if (need_normal_derivative && std::abs(exact.grad(x).dot(e.normal)) > tol)
                throw std::invalid_argument("incompatible boundary data: normal derivative does "
                                            "not vanish on the boundary");
        }
    }
}

} // namespace detail

/// Solve the Poisson benchmark with the requested methods and collect norms.
inline PoissonRun run_poisson_case(const Mesh& mesh, const ExactSolution& exact,
                                   const PoissonMethods& methods, const CaseOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    PoissonRun run;
    CaseResult& res = run.result;
    res.level = mesh.refinement_level;
    res.h = mesh.h_max;
    TriangleRule rule = triangle_rule(opt.quad_degree);
    EdgeRule erule = edge_rule(opt.edge_degree);

    if (methods.cr) {
        detail::check_dirichlet_compatible(mesh, exact, false);
        DiscreteProblem p = assemble_cr_poisson(mesh, exact.f, rule);
        SolveResult s = solve(p.system, opt.iterative);
        res.residuals["solver_cr"] = s.residual;
        res.dofs["cr"] = p.primal->n_active;
        run.u_cr = field_from_solution(p.primal, s.x);
        res.error_primal =
            l2_error(mesh, rule, 2, eval_of(exact.grad), field_gradient_eval(*run.u_cr));
        if (opt.postprocess) {
            run.recovered_gradient = recover_gradient(mesh, *run.u_cr);
            res.error_postprocessed = l2_error(mesh, rule, 2, eval_of(exact.grad),
                                               field_value_eval(*run.recovered_gradient));
        }
    }
    if (methods.rt) {
        DiscreteProblem p = assemble_rt_mixed(mesh, exact.f, rule);
        SolveResult s = solve(p.system, opt.iterative);
        res.residuals["solver_rt"] = s.residual;
        res.dofs["rt"] = p.primal->n_active;
        res.dofs["p0"] = p.displacement->n_active;
        run.sigma_rt = field_from_solution(p.primal, s.x);
        run.pi_rt_sigma = interp_rt(mesh, exact.grad, erule);
        res.error_interp_gap =
            l2_error(mesh, rule, 2, rt_value_eval(*run.sigma_rt), rt_value_eval(*run.pi_rt_sigma));

        PiecewiseField diff = *run.sigma_rt;
        diff.coeffs -= run.pi_rt_sigma->coeffs;
        HelmholtzRtResult hh = helmholtz_recover_rt(mesh, diff);
        res.residuals["helmholtz_rt"] = hh.closure_residual;
        res.residuals["div_gap"] = hh.max_divergence;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

/// Solve the clamped-plate benchmark with the requested methods; checks the
/// stress/displacement equivalence when both the modified Morley method and the
/// HHJ method were run.
inline PlateRun run_plate_case(const Mesh& mesh, const ExactSolution& exact,
                               const PlateMethods& methods, const CaseOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    PlateRun run;
    CaseResult& res = run.result;
    res.level = mesh.refinement_level;
    res.h = mesh.h_max;
    TriangleRule rule = triangle_rule(opt.quad_degree);
    EdgeRule erule = edge_rule(opt.edge_degree);
    detail::check_dirichlet_compatible(mesh, exact, true);

    MatrixFn hess = exact.hess;
    run.pi_hhj_hess = interp_hhj(mesh, hess, erule);

    if (methods.morley) {
        DiscreteProblem p = assemble_morley(mesh, exact.f, MorleyRhs::Standard, rule);
        SolveResult s = solve(p.system, opt.iterative);
        res.residuals["solver_morley"] = s.residual;
        res.dofs["morley"] = p.primal->n_active;
        run.u_morley = field_from_solution(p.primal, s.x);
    }
    if (methods.morley_modified) {
        DiscreteProblem p = assemble_morley(mesh, exact.f, MorleyRhs::Modified, rule);
        SolveResult s = solve(p.system, opt.iterative);
        res.residuals["solver_morley_modified"] = s.residual;
        res.dofs["morley"] = p.primal->n_active;
        run.u_morley_modified = field_from_solution(p.primal, s.x);
    }
    if (methods.hhj) {
        DiscreteProblem p = assemble_hhj_mixed(mesh, exact.f, rule);
        SolveResult s = solve(p.system, opt.iterative);
        res.residuals["solver_hhj"] = s.residual;
        res.dofs["hhj"] = p.primal->n_active;
        res.dofs["p1c0"] = p.displacement->n_active;
        run.sigma_hhj = field_from_solution(p.primal, s.x);
        run.u_hhj =
            field_from_solution(p.displacement, s.x.segment(p.system.stress_size,
                                                            p.displacement->n_active));
    }

    // table norms use the standard Morley solution; fall back to the modified
    // one when only that was requested
    const std::optional<PiecewiseField>& table_u =
        run.u_morley ? run.u_morley : run.u_morley_modified;
    if (table_u) {
        res.error_primal =
            l2_error(mesh, rule, 4, eval_of(hess), field_hessian_eval(*table_u));
        res.error_interp_gap = l2_error(mesh, rule, 4, field_hessian_eval(*table_u),
                                        hhj_value_eval(*run.pi_hhj_hess));
        if (opt.postprocess) {
            run.recovered_hessian = recover_hessian(mesh, *table_u);
            res.error_postprocessed = l2_error(mesh, rule, 4, eval_of(hess),
                                               sym_field_matrix_eval(*run.recovered_hessian));
        }
    }
    if (run.u_morley && run.u_morley_modified) {
        PiecewiseField diff = *run.u_morley;
        diff.coeffs -= run.u_morley_modified->coeffs;
        res.morley_mode_gap = l2_norm(mesh, rule, 4, field_hessian_eval(diff));
    }
    if (run.u_morley_modified && run.sigma_hhj) {
        double denom = l2_norm(mesh, rule, 4, hhj_value_eval(*run.sigma_hhj));
        double gap = l2_error(mesh, rule, 4, hhj_value_eval(*run.sigma_hhj),
                              field_hessian_eval(*run.u_morley_modified));
        res.equivalence_stress_gap = denom > 0.0 ? gap / denom : gap;

        PiecewiseField pd = interp_p1_vertices(*run.u_morley_modified);
        double ud = l2_norm(mesh, rule, 1, field_value_eval(*run.u_hhj));
        double ugap =
            l2_error(mesh, rule, 1, field_value_eval(*run.u_hhj), field_value_eval(pd));
        res.equivalence_displacement_gap = ud > 0.0 ? ugap / ud : ugap;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

} // namespace scfem
