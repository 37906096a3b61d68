#pragma once

#include "scfem/types.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace scfem {

/// Sparse bivariate polynomial sum c_ij x^i y^j.  Used to carry the manufactured
/// solutions and their derivatives in closed form.
struct Poly2 {
    struct Term {
        int i, j;
        double c;
    };
    std::vector<Term> terms;

    static Poly2 constant(double c) { return c == 0.0 ? Poly2{} : Poly2{{{0, 0, c}}}; }
    static Poly2 linear(double cx, double cy, double c0) {
        Poly2 p;
        if (cx != 0.0) p.terms.push_back({1, 0, cx});
        if (cy != 0.0) p.terms.push_back({0, 1, cy});
        if (c0 != 0.0) p.terms.push_back({0, 0, c0});
        return p;
    }

    Poly2 compressed() const {
        std::map<std::pair<int, int>, double> acc;
        for (const auto& t : terms) acc[{t.i, t.j}] += t.c;
        Poly2 out;
        for (const auto& [ij, c] : acc)
            if (c != 0.0) out.terms.push_back({ij.first, ij.second, c});
        return out;
    }

    Poly2 operator*(const Poly2& o) const {
        Poly2 out;
        for (const auto& a : terms)
            for (const auto& b : o.terms) out.terms.push_back({a.i + b.i, a.j + b.j, a.c * b.c});
        return out.compressed();
    }

    Poly2 operator+(const Poly2& o) const {
        Poly2 out;
        out.terms = terms;
        out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
        return out.compressed();
    }

    Poly2 operator*(double s) const {
        Poly2 out = *this;
        for (auto& t : out.terms) t.c *= s;
        return out;
    }

    Poly2 dx() const {
        Poly2 out;
        for (const auto& t : terms)
            if (t.i > 0) out.terms.push_back({t.i - 1, t.j, t.c * t.i});
        return out;
    }

    Poly2 dy() const {
        Poly2 out;
        for (const auto& t : terms)
            if (t.j > 0) out.terms.push_back({t.i, t.j - 1, t.c * t.j});
        return out;
    }

    int degree() const {
        int d = 0;
        for (const auto& t : terms) d = std::max(d, t.i + t.j);
        return d;
    }

    double operator()(const Vec2& p) const {
        // precompute the power tables; term counts here are small
        double xp[16], yp[16];
        int dmax = degree();
        xp[0] = yp[0] = 1.0;
        for (int k = 1; k <= dmax; ++k) {
            xp[k] = xp[k - 1] * p.x();
            yp[k] = yp[k - 1] * p.y();
        }
        double s = 0.0;
        for (const auto& t : terms) s += t.c * xp[t.i] * yp[t.j];
        return s;
    }
};

} // namespace scfem
