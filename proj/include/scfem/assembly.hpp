#pragma once

#include "scfem/dofmap.hpp"
#include "scfem/quadrature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <fstream>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace scfem {

using ScalarFn = std::function<double(const Vec2&)>;

/// Assembled linear system.  Saddle-point systems carry the symmetric block
/// form [[M, B^T], [B, 0]] with the stress block first.
struct SparseSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    bool saddle = false;
    int stress_size = 0;   // rows of the first block; 0 for plain SPD systems

    int size() const { return static_cast<int>(matrix.rows()); }
};

/// A discrete problem: the system plus the spaces its unknowns live in.
struct DiscreteProblem {
    SparseSystem system;
    std::shared_ptr<const DofMap> primal;         // CR/Morley, or the stress space
    std::shared_ptr<const DofMap> displacement;   // mixed methods only
};

struct SolveResult {
    Eigen::VectorXd x;
    double residual = 0.0;   // normwise backward error |Ax-b| / (|A||x| + |b|)
};

namespace detail {

inline double backward_error(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& b) {
    double num = (A * x - b).lpNorm<Eigen::Infinity>();
    double anorm = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            anorm = std::max(anorm, std::abs(it.value()));
    double den = anorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    return den > 0.0 ? num / den : num;
}

} // namespace detail

/// Solve the assembled system.  SPD systems use a sparse LDL^T factorization,
/// saddle systems a sparse LU; one step of iterative refinement is applied.
/// The iterative fallback (CG resp. MINRES) is kept behind a flag.
inline SolveResult solve(const SparseSystem& sys, bool iterative = false) {
    SolveResult r;
    const double tol = sys.saddle ? 1e-10 : 1e-12;
    if (sys.rhs.lpNorm<Eigen::Infinity>() == 0.0) {
        r.x = Eigen::VectorXd::Zero(sys.size());
        r.residual = 0.0;
        return r;
    }
    if (iterative) {
        if (sys.saddle) {
            Eigen::MINRES<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                          Eigen::IdentityPreconditioner>
                it(sys.matrix);
            it.setTolerance(1e-13);
            it.setMaxIterations(40 * sys.size());
            r.x = it.solve(sys.rhs);
        } else {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
                it(sys.matrix);
            it.setTolerance(1e-14);
            it.setMaxIterations(40 * sys.size());
            r.x = it.solve(sys.rhs);
        }
    } else if (sys.saddle) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.matrix);
        if (lu.info() != Eigen::Success)
            throw SolverError("sparse LU factorization failed on saddle system");
        r.x = lu.solve(sys.rhs);
        r.x += lu.solve(sys.rhs - sys.matrix * r.x);
    } else {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.matrix);
        if (ldlt.info() != Eigen::Success)
            throw SolverError("sparse LDLT factorization failed");
        r.x = ldlt.solve(sys.rhs);
        r.x += ldlt.solve(sys.rhs - sys.matrix * r.x);
    }
    r.residual = detail::backward_error(sys.matrix, r.x, sys.rhs);
    if (!std::isfinite(r.residual) || r.residual > tol)
        throw SolverError("solver did not reach its residual target", r.residual);
    return r;
}

/// Scatter a solution segment back to a field over the dofmap (masked dofs 0).
inline PiecewiseField field_from_solution(std::shared_ptr<const DofMap> dm,
                                          const Eigen::VectorXd& x, int offset = 0) {
    PiecewiseField f(dm);
    for (int i = 0; i < dm->n_total; ++i)
        if (dm->active_index[i] >= 0) f.coeff(i) = x[offset + dm->active_index[i]];
    return f;
}

/// Crouzeix-Raviart discretization of the Poisson problem:
/// (grad_h u, grad_h v) = (f, v) over CR0.
inline DiscreteProblem assemble_cr_poisson(const Mesh& mesh, const ScalarFn& f,
                                           const TriangleRule& rule,
                                           bool homogeneous_bc = true) {
    DiscreteProblem p;
    p.primal = std::make_shared<DofMap>(
        make_dofmap(mesh, homogeneous_bc ? ElementKind::CR0 : ElementKind::CR));
    const DofMap& dm = *p.primal;
    int n = dm.n_active;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.n_triangles());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    int dofs[6];
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        LocalBasis lb = local_basis(dm.kind, mesh, t);
        dm.element_dofs(t, dofs);
        double a = mesh.area(t);
        Vec2 g[3];
        for (int i = 0; i < 3; ++i) g[i] = lb.gradient(i, lb.verts[0]);
        for (int i = 0; i < 3; ++i) {
            int gi = dm.active_index[dofs[i]];
            if (gi < 0) continue;
            for (int j = 0; j < 3; ++j) {
                int gj = dm.active_index[dofs[j]];
                if (gj < 0) continue;
                trips.emplace_back(gi, gj, a * g[i].dot(g[j]));
            }
            double li = 0.0;
            for (int q = 0; q < rule.size(); ++q) {
                Vec2 x = rule.map_to(mesh, t, q);
                li += rule.physical_weight(a, q) * f(x) * lb.value(i, x);
            }
            rhs[gi] += li;
        }
    }
    p.system.matrix.resize(n, n);
    p.system.matrix.setFromTriplets(trips.begin(), trips.end());
    p.system.rhs = std::move(rhs);
    return p;
}

enum class MorleyRhs { Standard, Modified };

/// Morley discretization of the clamped plate problem:
/// (hess_h u, hess_h v) = (f, v), or (f, Pi_D v) in modified mode where Pi_D is
/// the vertex interpolant onto continuous P1 vanishing on the boundary.
inline DiscreteProblem assemble_morley(const Mesh& mesh, const ScalarFn& f, MorleyRhs rhs_mode,
                                       const TriangleRule& rule, bool homogeneous_bc = true) {
    DiscreteProblem p;
    p.primal = std::make_shared<DofMap>(
        make_dofmap(mesh, ElementKind::Morley, homogeneous_bc ? 1 : 0));
    const DofMap& dm = *p.primal;
    int n = dm.n_active;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(36 * mesh.n_triangles());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    int dofs[6];
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        LocalBasis lb = local_basis(ElementKind::Morley, mesh, t);
        dm.element_dofs(t, dofs);
        double a = mesh.area(t);
        Mat2 h[6];
        for (int i = 0; i < 6; ++i) h[i] = lb.hessian(i, lb.verts[0]);   // constant on K
        // vertex values of each local basis function, for the modified rhs
        double vtx[6][3];
        if (rhs_mode == MorleyRhs::Modified)
            for (int i = 0; i < 6; ++i)
                for (int vloc = 0; vloc < 3; ++vloc) vtx[i][vloc] = lb.value(i, lb.verts[vloc]);
        for (int i = 0; i < 6; ++i) {
            int gi = dm.active_index[dofs[i]];
            if (gi < 0) continue;
            for (int j = 0; j < 6; ++j) {
                int gj = dm.active_index[dofs[j]];
                if (gj < 0) continue;
                trips.emplace_back(gi, gj, a * h[i].cwiseProduct(h[j]).sum());
            }
            double li = 0.0;
            for (int q = 0; q < rule.size(); ++q) {
                Vec2 x = rule.map_to(mesh, t, q);
                double test;
                if (rhs_mode == MorleyRhs::Standard) {
                    test = lb.value(i, x);
                } else {
                    Eigen::Vector3d l = lb.barycentric(x);
                    test = 0.0;
                    for (int vloc = 0; vloc < 3; ++vloc)
                        if (!mesh.vertex_on_boundary[mesh.triangles[t][vloc]])
                            test += vtx[i][vloc] * l[vloc];
                }
                li += rule.physical_weight(a, q) * f(x) * test;
            }
            rhs[gi] += li;
        }
    }
    p.system.matrix.resize(n, n);
    p.system.matrix.setFromTriplets(trips.begin(), trips.end());
    p.system.rhs = std::move(rhs);
    return p;
}

/// Lowest-order Raviart-Thomas mixed discretization of the Poisson problem,
/// assembled in the symmetric block form [[M, B^T], [B, 0]] with
///   (sigma, tau) - (w, div tau) = 0,   (v, div sigma) = (-f, v),
/// so that sigma approximates grad u; the multiplier w then approximates -u.
inline DiscreteProblem assemble_rt_mixed(const Mesh& mesh, const ScalarFn& f,
                                         const TriangleRule& rule) {
    DiscreteProblem p;
    p.primal = std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::RT0));
    p.displacement = std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::P0));
    int ne = p.primal->n_active;
    int nt = p.displacement->n_active;
    int n = ne + nt;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(15 * mesh.n_triangles());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    int dofs[6];
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        LocalBasis lb = local_basis(ElementKind::RT0, mesh, t);
        p.primal->element_dofs(t, dofs);
        double a = mesh.area(t);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double mij = 0.0;
                for (int q = 0; q < rule.size(); ++q) {
                    Vec2 x = rule.map_to(mesh, t, q);
                    mij += rule.physical_weight(a, q) * lb.rt_value(i, x).dot(lb.rt_value(j, x));
                }
                trips.emplace_back(dofs[i], dofs[j], mij);
            }
            // coupling -(w, div tau): the integrated divergence of the flux
            // basis is exactly the dof sign
            double bik = mesh.edge_sign(t, i);
            trips.emplace_back(dofs[i], ne + t, -bik);
            trips.emplace_back(ne + t, dofs[i], -bik);
        }
        double fk = 0.0;
        for (int q = 0; q < rule.size(); ++q)
            fk += rule.physical_weight(a, q) * f(rule.map_to(mesh, t, q));
        rhs[ne + t] = fk;
    }
    p.system.matrix.resize(n, n);
    p.system.matrix.setFromTriplets(trips.begin(), trips.end());
    p.system.rhs = std::move(rhs);
    p.system.saddle = true;
    p.system.stress_size = ne;
    return p;
}

/// Hellan-Herrmann-Johnson mixed discretization of the clamped plate problem,
/// block form [[M, C^T], [C, 0]] with
///   (sigma, tau) + <divDiv_h tau, u> = 0,   <divDiv_h sigma, v> = (-f, v).
inline DiscreteProblem assemble_hhj_mixed(const Mesh& mesh, const ScalarFn& f,
                                          const TriangleRule& rule) {
    DiscreteProblem p;
    p.primal = std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::HHJ0));
    p.displacement = std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::P1C0));
    const DofMap& sdm = *p.primal;
    const DofMap& udm = *p.displacement;
    int ns = sdm.n_active;
    int nu = udm.n_active;
    int n = ns + nu;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(30 * mesh.n_triangles());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    int sdofs[6], udofs[6];
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        LocalBasis lb = local_basis(ElementKind::HHJ0, mesh, t);
        LocalBasis p1 = local_basis(ElementKind::P1C, mesh, t);
        sdm.element_dofs(t, sdofs);
        udm.element_dofs(t, udofs);
        double a = mesh.area(t);
        for (int i = 0; i < 3; ++i) {
            const Mat2& psi_i = lb.hhj_value(i);
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(sdofs[i], sdofs[j],
                                   a * psi_i.cwiseProduct(lb.hhj_value(j)).sum());
            // <divDiv_h Psi_i, hat_j> restricted to K: grad(hat_j) . n_out on edge i
            Vec2 n_out = mesh.outward_normal(t, i);
            for (int j = 0; j < 3; ++j) {
                int gj = udm.active_index[udofs[j]];
                if (gj < 0) continue;
                double cij = p1.gradient(j, p1.verts[0]).dot(n_out);
                trips.emplace_back(sdofs[i], ns + gj, cij);
                trips.emplace_back(ns + gj, sdofs[i], cij);
            }
        }
        for (int j = 0; j < 3; ++j) {
            int gj = udm.active_index[udofs[j]];
            if (gj < 0) continue;
            double lj = 0.0;
            for (int q = 0; q < rule.size(); ++q) {
                Vec2 x = rule.map_to(mesh, t, q);
                lj += rule.physical_weight(a, q) * f(x) * p1.value(j, x);
            }
            rhs[ns + gj] -= lj;
        }
    }
    p.system.matrix.resize(n, n);
    p.system.matrix.setFromTriplets(trips.begin(), trips.end());
    p.system.rhs = std::move(rhs);
    p.system.saddle = true;
    p.system.stress_size = ns;
    return p;
}

/// Dump the assembled matrix in coordinate text form, one "i j value" per line.
inline void dump_matrix(const SparseSystem& sys, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix dump: " + path);
    out.precision(17);
    for (int k = 0; k < sys.matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, k); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

} // namespace scfem
