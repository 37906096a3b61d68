#pragma once

#include "scfem/mesh.hpp"
#include "scfem/types.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace scfem {

/// The finite element families of this library.
///
/// Local degrees of freedom:
///   CR / CR0    3   edge mean values
///   Morley      6   vertex values + edge means of the normal derivative
///   RT0         3   integrated edge fluxes of sigma . n_e
///   HHJ0        3   integrated edge values of (tau n_e) . n_e
///   P1C / P1C0  3   vertex values
///   P0          1   element value
/// The "0" variants impose the homogeneous boundary conditions of their space.
enum class ElementKind { CR, CR0, Morley, RT0, HHJ0, P1C, P1C0, P0 };

inline int local_dof_count(ElementKind k) {
    switch (k) {
        case ElementKind::Morley: return 6;
        case ElementKind::P0: return 1;
        default: return 3;
    }
}

inline bool is_scalar_valued(ElementKind k) {
    return k != ElementKind::RT0 && k != ElementKind::HHJ0;
}

inline const char* kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::CR: return "CR";
        case ElementKind::CR0: return "CR0";
        case ElementKind::Morley: return "Morley";
        case ElementKind::RT0: return "RT0";
        case ElementKind::HHJ0: return "HHJ0";
        case ElementKind::P1C: return "P1C";
        case ElementKind::P1C0: return "P1C0";
        case ElementKind::P0: return "P0";
    }
    return "?";
}

/// Shape functions of one element on a physical triangle, dual to the dof
/// functionals listed under ElementKind.  Edge-based dofs are evaluated with
/// the caller-provided unit normals (the mesh's global normals in assembled
/// contexts, outward normals for a standalone triangle).
class LocalBasis {
  public:
    ElementKind kind;
    std::array<Vec2, 3> verts;
    std::array<Vec2, 3> edge_normals;   // normal of edge opposite vertex i
    std::array<double, 3> edge_lengths;
    double area = 0.0;

    LocalBasis(ElementKind k, const std::array<Vec2, 3>& v, const std::array<Vec2, 3>& normals)
        : kind(k), verts(v), edge_normals(normals) {
        double sa = 0.5 * cross2(verts[1] - verts[0], verts[2] - verts[0]);
        double hk = 0.0;
        for (int i = 0; i < 3; ++i) {
            Vec2 d = verts[(i + 2) % 3] - verts[(i + 1) % 3];
            edge_lengths[i] = d.norm();
            hk = std::max(hk, edge_lengths[i]);
        }
        if (sa < 1e-14 * hk * hk)
            throw std::invalid_argument("LocalBasis: degenerate or inverted triangle");
        area = sa;
        // barycentric gradients: grad l_i = rot90(opposite edge, inward) / (2A)
        for (int i = 0; i < 3; ++i) {
            Vec2 d = verts[(i + 2) % 3] - verts[(i + 1) % 3];
            bary_grad_[i] = rotate_ccw(d) / (2.0 * area);
        }
        switch (kind) {
            case ElementKind::Morley: build_morley(); break;
            case ElementKind::RT0:
                for (int i = 0; i < 3; ++i) {
                    double s = edge_normals[i].dot(outward_normal(i)) > 0.0 ? 1.0 : -1.0;
                    rt_coef_[i] = s / (2.0 * area);
                }
                break;
            case ElementKind::HHJ0: build_hhj(); break;
            default: break;
        }
    }

    int ndof() const { return local_dof_count(kind); }

    Vec2 outward_normal(int i) const {
        Vec2 d = verts[(i + 2) % 3] - verts[(i + 1) % 3];
        return rotate_cw(d).normalized();
    }

    Eigen::Vector3d barycentric(const Vec2& x) const { return bary(x); }

    const Vec2& barycentric_gradient(int i) const { return bary_grad_[i]; }

    // --- scalar families -------------------------------------------------

    double value(int i, const Vec2& x) const {
        Eigen::Vector3d l = bary(x);
        switch (kind) {
            case ElementKind::CR:
            case ElementKind::CR0: return 1.0 - 2.0 * l[i];
            case ElementKind::P1C:
            case ElementKind::P1C0: return l[i];
            case ElementKind::P0: return 1.0;
            case ElementKind::Morley: return morley_eval(i, x, 0, 0);
            default: throw std::invalid_argument("LocalBasis::value: vector-valued element");
        }
    }

    Vec2 gradient(int i, const Vec2& x) const {
        switch (kind) {
            case ElementKind::CR:
            case ElementKind::CR0: return -2.0 * bary_grad_[i];
            case ElementKind::P1C:
            case ElementKind::P1C0: return bary_grad_[i];
            case ElementKind::P0: return Vec2::Zero();
            case ElementKind::Morley:
                return Vec2(morley_eval(i, x, 1, 0), morley_eval(i, x, 0, 1));
            default: throw std::invalid_argument("LocalBasis::gradient: vector-valued element");
        }
    }

    /// Piecewise-linear families return the exact zero matrix.
    Mat2 hessian(int i, const Vec2& x) const {
        Mat2 h = Mat2::Zero();
        if (kind == ElementKind::Morley) {
            h(0, 0) = morley_eval(i, x, 2, 0);
            h(1, 1) = morley_eval(i, x, 0, 2);
            h(0, 1) = h(1, 0) = morley_eval(i, x, 1, 1);
        }
        return h;
    }

    // --- RT0 --------------------------------------------------------------

    /// Basis dual to the integrated-flux dofs: phi_i = s_i (x - p_i) / (2|K|).
    Vec2 rt_value(int i, const Vec2& x) const {
        check_kind(ElementKind::RT0);
        return rt_coef_[i] * (x - verts[i]);
    }

    double rt_divergence(int i) const {
        check_kind(ElementKind::RT0);
        return 2.0 * rt_coef_[i];
    }

    // --- HHJ0 ---------------------------------------------------------------

    /// Constant symmetric matrix dual to the integrated nn-dofs.
    const Mat2& hhj_value(int i) const {
        check_kind(ElementKind::HHJ0);
        return hhj_basis_[i];
    }

  private:
    std::array<Vec2, 3> bary_grad_;
    Eigen::Matrix<double, 6, 6> morley_coef_;   // column j = monomial coefs of basis j
    std::array<double, 3> rt_coef_{};
    std::array<Mat2, 3> hhj_basis_;
    Vec2 scale_center_ = Vec2::Zero();
    double scale_ = 1.0;

    void check_kind(ElementKind k) const {
        if (kind != k) throw std::invalid_argument("LocalBasis: wrong element kind");
    }

    Eigen::Vector3d bary(const Vec2& x) const {
        double det = 2.0 * area;
        double l1 = cross2(x - verts[0], verts[2] - verts[0]) / det;
        double l2 = cross2(verts[1] - verts[0], x - verts[0]) / det;
        return Eigen::Vector3d(1.0 - l1 - l2, l1, l2);
    }

    // Morley basis as P2 polynomials in centered, h-scaled coordinates, found
    // by inverting the 6x6 dof matrix.  Scaling keeps the system well
    // conditioned on small elements.
    void build_morley() {
        scale_center_ = (verts[0] + verts[1] + verts[2]) / 3.0;
        scale_ = std::max({edge_lengths[0], edge_lengths[1], edge_lengths[2]});
        auto mono = [](const Vec2& u) {
            Eigen::Matrix<double, 6, 1> row;
            row << 1.0, u.x(), u.y(), u.x() * u.x(), u.x() * u.y(), u.y() * u.y();
            return row;
        };
        auto mono_grad = [](const Vec2& u) {
            Eigen::Matrix<double, 2, 6> g;
            g << 0, 1, 0, 2.0 * u.x(), u.y(), 0,
                 0, 0, 1, 0, u.x(), 2.0 * u.y();
            return g;
        };
        Eigen::Matrix<double, 6, 6> dof;
        for (int i = 0; i < 3; ++i)
            dof.row(i) = mono((verts[i] - scale_center_) / scale_).transpose();
        for (int i = 0; i < 3; ++i) {
            // mean of dv/dn over edge i = value at the midpoint (dv linear)
            Vec2 mid = 0.5 * (verts[(i + 1) % 3] + verts[(i + 2) % 3]);
            Eigen::Matrix<double, 2, 6> g = mono_grad((mid - scale_center_) / scale_) / scale_;
            dof.row(3 + i) = edge_normals[i].transpose() * g;
        }
        Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(dof);
        if (!lu.isInvertible())
            throw std::invalid_argument("LocalBasis: singular Morley dof matrix");
        morley_coef_ = lu.inverse();
    }

    double morley_eval(int j, const Vec2& x, int dx, int dy) const {
        Vec2 u = (x - scale_center_) / scale_;
        const auto& c = morley_coef_.col(j);
        double v = 0.0;
        if (dx == 0 && dy == 0)
            v = c[0] + c[1] * u.x() + c[2] * u.y() + c[3] * u.x() * u.x() + c[4] * u.x() * u.y() +
                c[5] * u.y() * u.y();
        else if (dx == 1 && dy == 0)
            v = (c[1] + 2.0 * c[3] * u.x() + c[4] * u.y()) / scale_;
        else if (dx == 0 && dy == 1)
            v = (c[2] + c[4] * u.x() + 2.0 * c[5] * u.y()) / scale_;
        else if (dx == 2 && dy == 0)
            v = 2.0 * c[3] / (scale_ * scale_);
        else if (dx == 0 && dy == 2)
            v = 2.0 * c[5] / (scale_ * scale_);
        else
            v = c[4] / (scale_ * scale_);
        return v;
    }

    // Psi_i = (t_{i+1} t_{i-1}^T + t_{i-1} t_{i+1}^T) / (2 (n_i.t_{i-1})(n_i.t_{i+1})),
    // normalized so the integrated nn-dof over edge i is 1.
    void build_hhj() {
        std::array<Vec2, 3> tang;
        for (int i = 0; i < 3; ++i)
            tang[i] = (verts[(i + 2) % 3] - verts[(i + 1) % 3]) / edge_lengths[i];
        for (int i = 0; i < 3; ++i) {
            const Vec2& ta = tang[(i + 1) % 3];
            const Vec2& tb = tang[(i + 2) % 3];
            const Vec2& n = edge_normals[i];
            double denom = 2.0 * n.dot(ta) * n.dot(tb);
            Mat2 sym = ta * tb.transpose() + tb * ta.transpose();
            hhj_basis_[i] = sym / (denom * edge_lengths[i]);
        }
    }
};

/// Build the shape functions for a physical triangle, using its outward edge
/// normals for the edge dofs.
inline LocalBasis local_basis(ElementKind kind, const std::array<Vec2, 3>& verts) {
    std::array<Vec2, 3> normals;
    for (int i = 0; i < 3; ++i) {
        Vec2 d = verts[(i + 2) % 3] - verts[(i + 1) % 3];
        normals[i] = rotate_cw(d).normalized();
    }
    return LocalBasis(kind, verts, normals);
}

/// Build the shape functions for element t of a mesh, with edge dofs defined
/// through the mesh's global edge normals.
inline LocalBasis local_basis(ElementKind kind, const Mesh& m, int t) {
    std::array<Vec2, 3> verts = {m.vertex(t, 0), m.vertex(t, 1), m.vertex(t, 2)};
    std::array<Vec2, 3> normals;
    for (int i = 0; i < 3; ++i) normals[i] = m.edges[m.tri_edges[t][i]].normal;
    return LocalBasis(kind, verts, normals);
}

} // namespace scfem
