#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace scfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Raised for invalid mesh files or non-conforming topology.
struct MeshError : std::runtime_error {
    explicit MeshError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a linear solve breaks down or misses its residual target.
struct SolverError : std::runtime_error {
    double residual;
    explicit SolverError(const std::string& msg, double res = -1.0)
        : std::runtime_error(msg), residual(res) {}
};

/// Raised when refinement would exceed the configured element budget.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rotate a vector by -90 degrees; for a CCW-traversed edge this points outward.
inline Vec2 rotate_cw(const Vec2& v) { return Vec2(v.y(), -v.x()); }

/// Rotate by +90 degrees.
inline Vec2 rotate_ccw(const Vec2& v) { return Vec2(-v.y(), v.x()); }

} // namespace scfem
