#pragma once

#include "scfem/elements.hpp"
#include "scfem/mesh.hpp"

#include <memory>
#include <vector>

namespace scfem {

/// Global degree-of-freedom numbering for one element kind on one mesh.
///
/// Shared mesh entities map to a single global dof, which is what enforces the
/// weak continuity of each space (edge means for CR, nn-traces for HHJ0, ...).
/// Homogeneous boundary conditions are realized as a mask; masked dofs keep
/// their index but are excluded from assembled systems.
struct DofMap {
    ElementKind kind;
    const Mesh* mesh = nullptr;
    int n_total = 0;
    int n_active = 0;
    std::vector<bool> masked;        // size n_total
    std::vector<int> active_index;   // dof -> [0, n_active) or -1

    int vertex_offset = 0;   // Morley: vertices first, then edges
    int edge_offset = 0;

    bool uses_vertices() const {
        return kind == ElementKind::Morley || kind == ElementKind::P1C ||
               kind == ElementKind::P1C0;
    }
    bool uses_edges() const {
        return kind == ElementKind::Morley || kind == ElementKind::CR ||
               kind == ElementKind::CR0 || kind == ElementKind::RT0 ||
               kind == ElementKind::HHJ0;
    }

    int vertex_dof(int v) const { return vertex_offset + v; }
    int edge_dof(int e) const { return edge_offset + e; }
    int element_dof(int t) const { return t; }

    /// Global dofs of element t in local order (vertices then edges for Morley).
    void element_dofs(int t, int* out) const {
        const auto& tri = mesh->triangles[t];
        const auto& te = mesh->tri_edges[t];
        switch (kind) {
            case ElementKind::P0: out[0] = t; break;
            case ElementKind::P1C:
            case ElementKind::P1C0:
                for (int i = 0; i < 3; ++i) out[i] = vertex_dof(tri[i]);
                break;
            case ElementKind::CR:
            case ElementKind::CR0:
            case ElementKind::RT0:
            case ElementKind::HHJ0:
                for (int i = 0; i < 3; ++i) out[i] = edge_dof(te[i]);
                break;
            case ElementKind::Morley:
                for (int i = 0; i < 3; ++i) out[i] = vertex_dof(tri[i]);
                for (int i = 0; i < 3; ++i) out[3 + i] = edge_dof(te[i]);
                break;
        }
    }
};

/// Build the dof numbering for a kind.  with_boundary_conditions overrides the
/// kind's default masking (used by tests that need the unconstrained space).
inline DofMap make_dofmap(const Mesh& mesh, ElementKind kind, int with_boundary_conditions = -1) {
    DofMap d;
    d.kind = kind;
    d.mesh = &mesh;
    bool bc;
    switch (kind) {
        case ElementKind::CR0:
        case ElementKind::Morley:
        case ElementKind::P1C0: bc = true; break;
        default: bc = false; break;
    }
    if (with_boundary_conditions >= 0) bc = (with_boundary_conditions != 0);

    int nv = mesh.n_vertices(), ne = mesh.n_edges(), nt = mesh.n_triangles();
    if (kind == ElementKind::P0) {
        d.n_total = nt;
    } else if (kind == ElementKind::Morley) {
        d.vertex_offset = 0;
        d.edge_offset = nv;
        d.n_total = nv + ne;
    } else if (d.uses_vertices()) {
        d.n_total = nv;
    } else {
        d.edge_offset = 0;
        d.n_total = ne;
    }

    d.masked.assign(d.n_total, false);
    if (bc) {
        if (d.uses_vertices())
            for (int v = 0; v < nv; ++v)
                if (mesh.vertex_on_boundary[v]) d.masked[d.vertex_dof(v)] = true;
        if (d.uses_edges())
            for (int e = 0; e < ne; ++e)
                if (mesh.edges[e].on_boundary) d.masked[d.edge_dof(e)] = true;
    }
    d.active_index.assign(d.n_total, -1);
    d.n_active = 0;
    for (int i = 0; i < d.n_total; ++i)
        if (!d.masked[i]) d.active_index[i] = d.n_active++;
    return d;
}

/// A finite element function: dof coefficients over a DofMap, with ncomp
/// interleaved components per dof (for vector- or matrix-valued recoveries of
/// scalar families; RT0 and HHJ0 are intrinsically vector/matrix valued and
/// use ncomp = 1).
struct PiecewiseField {
    std::shared_ptr<const DofMap> dofmap;
    int ncomp = 1;
    Eigen::VectorXd coeffs;

    PiecewiseField() = default;
    PiecewiseField(std::shared_ptr<const DofMap> dm, int nc = 1)
        : dofmap(std::move(dm)), ncomp(nc),
          coeffs(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofmap->n_total) * nc)) {}

    const Mesh& mesh() const { return *dofmap->mesh; }
    ElementKind kind() const { return dofmap->kind; }

    double coeff(int dof, int c = 0) const { return coeffs[dof * ncomp + c]; }
    double& coeff(int dof, int c = 0) { return coeffs[dof * ncomp + c]; }
};

namespace detail {

inline void check_inside(const LocalBasis& lb, const Vec2& x) {
    Eigen::Vector3d l = lb.barycentric(x);
    if (l.minCoeff() < -1e-10 || l.maxCoeff() > 1.0 + 1e-10)
        throw std::invalid_argument("eval_field: point outside element");
}

} // namespace detail

/// Values of all components of a scalar-family field at x in element t.
inline Eigen::VectorXd eval_value(const PiecewiseField& f, const LocalBasis& lb, int t,
                                  const Vec2& x, bool check = false) {
    if (check) detail::check_inside(lb, x);
    const DofMap& dm = *f.dofmap;
    int nd = lb.ndof();
    int dofs[6];
    dm.element_dofs(t, dofs);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(f.ncomp);
    for (int i = 0; i < nd; ++i) {
        double phi = lb.value(i, x);
        for (int c = 0; c < f.ncomp; ++c) out[c] += f.coeff(dofs[i], c) * phi;
    }
    return out;
}

/// Gradients of all components: row c is the gradient of component c.
inline Eigen::MatrixXd eval_gradient(const PiecewiseField& f, const LocalBasis& lb, int t,
                                     const Vec2& x, bool check = false) {
    if (check) detail::check_inside(lb, x);
    const DofMap& dm = *f.dofmap;
    int nd = lb.ndof();
    int dofs[6];
    dm.element_dofs(t, dofs);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.ncomp, 2);
    for (int i = 0; i < nd; ++i) {
        Vec2 g = lb.gradient(i, x);
        for (int c = 0; c < f.ncomp; ++c) out.row(c) += f.coeff(dofs[i], c) * g.transpose();
    }
    return out;
}

/// Hessian of component c (exact zero for piecewise-linear families).
inline Mat2 eval_hessian(const PiecewiseField& f, const LocalBasis& lb, int t, const Vec2& x,
                         int c = 0, bool check = false) {
    if (check) detail::check_inside(lb, x);
    const DofMap& dm = *f.dofmap;
    int nd = lb.ndof();
    int dofs[6];
    dm.element_dofs(t, dofs);
    Mat2 out = Mat2::Zero();
    for (int i = 0; i < nd; ++i) out += f.coeff(dofs[i], c) * lb.hessian(i, x);
    return out;
}

inline Vec2 eval_rt_value(const PiecewiseField& f, const LocalBasis& lb, int t, const Vec2& x,
                          bool check = false) {
    if (check) detail::check_inside(lb, x);
    int dofs[6];
    f.dofmap->element_dofs(t, dofs);
    Vec2 out = Vec2::Zero();
    for (int i = 0; i < 3; ++i) out += f.coeff(dofs[i]) * lb.rt_value(i, x);
    return out;
}

inline double eval_rt_divergence(const PiecewiseField& f, const LocalBasis& lb, int t) {
    int dofs[6];
    f.dofmap->element_dofs(t, dofs);
    double out = 0.0;
    for (int i = 0; i < 3; ++i) out += f.coeff(dofs[i]) * lb.rt_divergence(i);
    return out;
}

inline Mat2 eval_hhj_value(const PiecewiseField& f, const LocalBasis& lb, int t) {
    int dofs[6];
    f.dofmap->element_dofs(t, dofs);
    Mat2 out = Mat2::Zero();
    for (int i = 0; i < 3; ++i) out += f.coeff(dofs[i]) * lb.hhj_value(i);
    return out;
}

} // namespace scfem
