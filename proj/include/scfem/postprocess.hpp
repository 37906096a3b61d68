#pragma once

#include "scfem/dofmap.hpp"
#include "scfem/interpolation.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <deque>
#include <functional>
#include <vector>

namespace scfem {

/// Per-element evaluator of an ncomp-valued piecewise function.
using ComponentEvaluator = std::function<void(int t, const Vec2& x, double* out)>;

/// Midpoint recovery into (CR)^ncomp.
///
/// Interior edge midpoints receive the average of the two one-sided values.
/// Boundary edge midpoints are filled by linear extrapolation
///   value(m) = 2 value(m') - value(m'')
/// where e' is the interior edge of the boundary element with the smallest
/// global index, K' its other element, and e'' the edge of K' sharing no vertex
/// with e.  On meshes so coarse that e'' is itself an unresolved boundary edge,
/// the one-sided element value is used instead.
inline PiecewiseField edge_average_recovery(const Mesh& mesh, int ncomp,
                                            const ComponentEvaluator& q) {
    PiecewiseField out(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::CR)), ncomp);
    const int ne = mesh.n_edges();
    std::vector<char> ready(ne, 0);
    std::vector<double> buf(ncomp), buf2(ncomp);

    bool has_interior = false;
    for (int e = 0; e < ne; ++e) {
        const MeshEdge& ed = mesh.edges[e];
        if (ed.on_boundary) continue;
        has_interior = true;
        q(ed.tri[0], ed.midpoint, buf.data());
        q(ed.tri[1], ed.midpoint, buf2.data());
        for (int c = 0; c < ncomp; ++c) out.coeff(e, c) = 0.5 * (buf[c] + buf2[c]);
        ready[e] = 1;
    }
    if (!has_interior)
        throw std::invalid_argument("edge_average_recovery: mesh has no interior edge");

    auto pick_neighbor = [&](int e, int& eprime, int& esecond) {
        const MeshEdge& ed = mesh.edges[e];
        int k = ed.tri[0];
        eprime = -1;
        for (int i = 0; i < 3; ++i) {
            int cand = mesh.tri_edges[k][i];
            if (!mesh.edges[cand].on_boundary && (eprime == -1 || cand < eprime)) eprime = cand;
        }
        if (eprime == -1)
            throw std::invalid_argument("edge_average_recovery: boundary element without "
                                        "interior edge");
        const MeshEdge& ep = mesh.edges[eprime];
        int kp = (ep.tri[0] == k) ? ep.tri[1] : ep.tri[0];
        esecond = -1;
        int fallback = -1;
        for (int i = 0; i < 3; ++i) {
            int cand = mesh.tri_edges[kp][i];
            if (cand == eprime) continue;
            const MeshEdge& ec = mesh.edges[cand];
            bool disjoint = ec.a != ed.a && ec.a != ed.b && ec.b != ed.a && ec.b != ed.b;
            if (disjoint && (esecond == -1 || cand < esecond)) esecond = cand;
            if (fallback == -1 || cand < fallback) fallback = cand;
        }
        if (esecond == -1) esecond = fallback;
    };

    // Boundary pass; e'' can itself be a boundary edge on very coarse meshes,
    // so iterate until no further value resolves.
    std::deque<int> pending;
    for (int e = 0; e < ne; ++e)
        if (mesh.edges[e].on_boundary) pending.push_back(e);
    std::size_t stall = 0;
    while (!pending.empty() && stall < pending.size()) {
        int e = pending.front();
        pending.pop_front();
        int eprime, esecond;
        pick_neighbor(e, eprime, esecond);
        if (!ready[esecond]) {
            pending.push_back(e);
            ++stall;
            continue;
        }
        stall = 0;
        for (int c = 0; c < ncomp; ++c)
            out.coeff(e, c) = 2.0 * out.coeff(eprime, c) - out.coeff(esecond, c);
        ready[e] = 1;
    }
    for (int e : pending) {
        q(mesh.edges[e].tri[0], mesh.edges[e].midpoint, buf.data());
        for (int c = 0; c < ncomp; ++c) out.coeff(e, c) = buf[c];
        ready[e] = 1;
    }
    return out;
}

/// Recovery of an RT0 field into (CR)^2, evaluating the element polynomial on
/// each side of the midpoint.
inline PiecewiseField edge_average_recovery(const Mesh& mesh, const PiecewiseField& q) {
    if (q.kind() == ElementKind::RT0) {
        return edge_average_recovery(mesh, 2, [&](int t, const Vec2& x, double* out) {
            LocalBasis lb = local_basis(ElementKind::RT0, mesh, t);
            Vec2 v = eval_rt_value(q, lb, t, x);
            out[0] = v.x();
            out[1] = v.y();
        });
    }
    if (q.kind() == ElementKind::HHJ0) {
        // symmetric storage (t11, t12, t22)
        return edge_average_recovery(mesh, 3, [&](int t, const Vec2&, double* out) {
            LocalBasis lb = local_basis(ElementKind::HHJ0, mesh, t);
            Mat2 v = eval_hhj_value(q, lb, t);
            out[0] = v(0, 0);
            out[1] = v(0, 1);
            out[2] = v(1, 1);
        });
    }
    throw std::invalid_argument("edge_average_recovery: unsupported input kind");
}

/// Recovery of the broken gradient of a scalar field into (CR)^2.
inline PiecewiseField recover_gradient(const Mesh& mesh, const PiecewiseField& u) {
    return edge_average_recovery(mesh, 2, [&](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(u.kind(), mesh, t);
        Eigen::MatrixXd g = eval_gradient(u, lb, t, x);
        out[0] = g(0, 0);
        out[1] = g(0, 1);
    });
}

/// Recovery of the broken hessian of a scalar field into symmetric (CR)^3
/// storage (h11, h12, h22).
inline PiecewiseField recover_hessian(const Mesh& mesh, const PiecewiseField& u) {
    return edge_average_recovery(mesh, 3, [&](int t, const Vec2& x, double* out) {
        LocalBasis lb = local_basis(u.kind(), mesh, t);
        Mat2 h = eval_hessian(u, lb, t, x);
        out[0] = h(0, 0);
        out[1] = h(0, 1);
        out[2] = h(1, 1);
    });
}

struct HelmholtzRtResult {
    PiecewiseField potential;    // continuous P1, zero at vertex 0
    double closure_residual;     // max defect of grad w = (-tau2, tau1) over all element edges
    double max_divergence;       // max element-wise |div tau|
};

/// Reconstruct the continuous piecewise-linear potential w with curl w =
/// (w_y, -w_x) = tau for a divergence-free RT0 field, by integrating the
/// rotated values along a breadth-first spanning tree of the vertex graph
/// rooted at vertex 0.  The closure residual over non-tree edges flags
/// non-divergence-free input or a non-simply-connected domain.
inline HelmholtzRtResult helmholtz_recover_rt(const Mesh& mesh, const PiecewiseField& tau) {
    if (tau.kind() != ElementKind::RT0)
        throw std::invalid_argument("helmholtz_recover_rt: expected an RT0 field");
    const int nt = mesh.n_triangles();
    std::vector<Vec2> grad_w(nt);
    double max_div = 0.0;
    for (int t = 0; t < nt; ++t) {
        LocalBasis lb = local_basis(ElementKind::RT0, mesh, t);
        max_div = std::max(max_div, std::abs(eval_rt_divergence(tau, lb, t)));
        Vec2 v = eval_rt_value(tau, lb, t, mesh.centroid(t));
        grad_w[t] = Vec2(-v.y(), v.x());
    }

    // vertex adjacency through edges, BFS from vertex 0
    std::vector<std::vector<std::pair<int, int>>> adj(mesh.n_vertices());   // (neighbor, edge)
    for (int e = 0; e < mesh.n_edges(); ++e) {
        adj[mesh.edges[e].a].emplace_back(mesh.edges[e].b, e);
        adj[mesh.edges[e].b].emplace_back(mesh.edges[e].a, e);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    PiecewiseField w(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::P1C)));
    std::vector<char> visited(mesh.n_vertices(), 0);
    std::deque<int> queue{0};
    visited[0] = 1;
    while (!queue.empty()) {
        int a = queue.front();
        queue.pop_front();
        for (auto [b, e] : adj[a]) {
            if (visited[b]) continue;
            visited[b] = 1;
            int k = mesh.edges[e].tri[0];
            w.coeff(b) = w.coeff(a) + (mesh.vertices[b] - mesh.vertices[a]).dot(grad_w[k]);
            queue.push_back(b);
        }
    }

    double defect = 0.0;
    for (int t = 0; t < nt; ++t) {
        for (int i = 0; i < 3; ++i) {
            int a = mesh.triangles[t][(i + 1) % 3];
            int b = mesh.triangles[t][(i + 2) % 3];
            double inc = (mesh.vertices[b] - mesh.vertices[a]).dot(grad_w[t]);
            defect = std::max(defect, std::abs(w.coeff(b) - w.coeff(a) - inc));
        }
    }
    return {std::move(w), defect, max_div};
}

struct HelmholtzHhjResult {
    PiecewiseField displacement;   // continuous (P1)^2 modulo rigid motions
    double residual;               // L2 norm of H^T eps(phi) H - tau
};

namespace detail {
inline void add_sym(std::vector<Eigen::Triplet<double>>& trips, int r, int c, double v) {
    trips.emplace_back(r, c, v);
    trips.emplace_back(c, r, v);
}
} // namespace detail

/// Reconstruct phi with H^T eps(phi) H = tau for a divDiv-free HHJ0 field by a
/// constrained least-squares fit over continuous piecewise-linear vector
/// fields; the rigid-motion gauge is fixed by three orthogonality constraints
/// on the vertex values.  Refuses input that is not divDiv-free.
inline HelmholtzHhjResult helmholtz_recover_hhj(const Mesh& mesh, const PiecewiseField& tau,
                                                double hypothesis_tol = 1e-10) {
    if (tau.kind() != ElementKind::HHJ0)
        throw std::invalid_argument("helmholtz_recover_hhj: expected an HHJ0 field");
    const int nt = mesh.n_triangles();
    const int nv = mesh.n_vertices();

    std::vector<Mat2> tau_k(nt);
    double tau_scale = 0.0;
    for (int t = 0; t < nt; ++t) {
        LocalBasis lb = local_basis(ElementKind::HHJ0, mesh, t);
        tau_k[t] = eval_hhj_value(tau, lb, t);
        tau_scale = std::max(tau_scale, tau_k[t].cwiseAbs().maxCoeff());
    }

    // hypothesis: <divDiv_h tau, hat_z> = 0 for every interior vertex
    std::vector<double> divdiv(nv, 0.0);
    for (int t = 0; t < nt; ++t) {
        LocalBasis p1 = local_basis(ElementKind::P1C, mesh, t);
        for (int i = 0; i < 3; ++i) {
            Vec2 n_out = mesh.outward_normal(t, i);
            double tnn = n_out.dot(tau_k[t] * n_out) * mesh.edges[mesh.tri_edges[t][i]].length;
            for (int j = 0; j < 3; ++j)
                divdiv[mesh.triangles[t][j]] += tnn * p1.gradient(j, p1.verts[0]).dot(n_out);
        }
    }
    double hyp = 0.0;
    for (int z = 0; z < nv; ++z)
        if (!mesh.vertex_on_boundary[z]) hyp = std::max(hyp, std::abs(divdiv[z]));
    if (hyp > hypothesis_tol * (1.0 + tau_scale))
        throw std::invalid_argument("helmholtz_recover_hhj: input is not divDiv-free "
                                    "(residual " + std::to_string(hyp) + ")");

    // augmented least-squares system [[I A 0],[A^T 0 G^T],[0 G 0]]
    const int nr = 3 * nt, nphi = 2 * nv;
    const int n = nr + nphi + 3;
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    auto phi_col = [nr](int v, int comp) { return nr + 2 * v + comp; };

    for (int t = 0; t < nt; ++t) {
        LocalBasis p1 = local_basis(ElementKind::P1C, mesh, t);
        double w1 = std::sqrt(mesh.area(t));
        double w2 = std::sqrt(2.0 * mesh.area(t));
        int r0 = 3 * t;
        trips.emplace_back(r0 + 0, r0 + 0, 1.0);
        trips.emplace_back(r0 + 1, r0 + 1, 1.0);
        trips.emplace_back(r0 + 2, r0 + 2, 1.0);
        rhs[r0 + 0] = w1 * tau_k[t](0, 0);
        rhs[r0 + 1] = w2 * tau_k[t](0, 1);
        rhs[r0 + 2] = w1 * tau_k[t](1, 1);
        for (int j = 0; j < 3; ++j) {
            Vec2 g = p1.gradient(j, p1.verts[0]);
            int v = mesh.triangles[t][j];
            // (H^T eps(phi) H)_{11} = eps_{22} = d phi_2 / d x2
            detail::add_sym(trips, r0 + 0, phi_col(v, 1), w1 * g.y());
            // (H^T eps(phi) H)_{12} = -eps_{12}
            detail::add_sym(trips, r0 + 1, phi_col(v, 0), -0.5 * w2 * g.y());
            detail::add_sym(trips, r0 + 1, phi_col(v, 1), -0.5 * w2 * g.x());
            // (H^T eps(phi) H)_{22} = eps_{11}
            detail::add_sym(trips, r0 + 2, phi_col(v, 0), w1 * g.x());
        }
    }
    const int crow = nr + nphi;
    for (int v = 0; v < nv; ++v) {
        detail::add_sym(trips, crow + 0, phi_col(v, 0), 1.0);
        detail::add_sym(trips, crow + 1, phi_col(v, 1), 1.0);
        detail::add_sym(trips, crow + 2, phi_col(v, 0), -mesh.vertices[v].y());
        detail::add_sym(trips, crow + 2, phi_col(v, 1), mesh.vertices[v].x());
    }
    Eigen::SparseMatrix<double> kkt(n, n);
    kkt.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(kkt);
    if (lu.info() != Eigen::Success)
        throw SolverError("helmholtz_recover_hhj: factorization failed");
    Eigen::VectorXd x = lu.solve(rhs);
    x += lu.solve(rhs - kkt * x);

    PiecewiseField phi(std::make_shared<DofMap>(make_dofmap(mesh, ElementKind::P1C)), 2);
    for (int v = 0; v < nv; ++v) {
        phi.coeff(v, 0) = x[phi_col(v, 0)];
        phi.coeff(v, 1) = x[phi_col(v, 1)];
    }
    return {std::move(phi), x.segment(0, nr).norm()};
}

} // namespace scfem
