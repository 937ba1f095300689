#pragma once
// Second-order jets (value, gradient, Hessian) over the four coordinates.
// The box-domain quadratures differentiate their integrands analytically
// through these, so quadrature error is the only discretization error there.

#include "ac4/core.hpp"

namespace ac4 {

struct Jet2 {
    double v = 0;
    std::array<double, 4> g{};
    std::array<std::array<double, 4>, 4> h{};

    Jet2() = default;
    explicit Jet2(double c) : v(c) {}
    static Jet2 variable(int axis, double value) {
        Jet2 j(value);
        j.g[axis] = 1.0;
        return j;
    }

    Jet2& operator+=(const Jet2& o) {
        v += o.v;
        for (int a = 0; a < 4; ++a) {
            g[a] += o.g[a];
            for (int b = 0; b < 4; ++b) h[a][b] += o.h[a][b];
        }
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        v -= o.v;
        for (int a = 0; a < 4; ++a) {
            g[a] -= o.g[a];
            for (int b = 0; b < 4; ++b) h[a][b] -= o.h[a][b];
        }
        return *this;
    }
    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator-(const Jet2& a) {
        Jet2 r;
        r.v = -a.v;
        for (int i = 0; i < 4; ++i) {
            r.g[i] = -a.g[i];
            for (int j = 0; j < 4; ++j) r.h[i][j] = -a.h[i][j];
        }
        return r;
    }
    friend Jet2 operator*(const Jet2& a, const Jet2& b) {
        Jet2 r;
        r.v = a.v * b.v;
        for (int i = 0; i < 4; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                r.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
        return r;
    }
    friend Jet2 operator*(double s, Jet2 a) {
        a.v *= s;
        for (int i = 0; i < 4; ++i) {
            a.g[i] *= s;
            for (int j = 0; j < 4; ++j) a.h[i][j] *= s;
        }
        return a;
    }
    friend Jet2 operator+(Jet2 a, double c) {
        a.v += c;
        return a;
    }
    friend Jet2 operator-(Jet2 a, double c) {
        a.v -= c;
        return a;
    }
};

/// Composition with a scalar function given value / first / second derivative.
inline Jet2 jet_compose(const Jet2& a, double f, double df, double d2f) {
    Jet2 r;
    r.v = f;
    for (int i = 0; i < 4; ++i) r.g[i] = df * a.g[i];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.h[i][j] = df * a.h[i][j] + d2f * a.g[i] * a.g[j];
    return r;
}

inline Jet2 sin(const Jet2& a) { return jet_compose(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return jet_compose(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 exp(const Jet2& a) {
    double e = std::exp(a.v);
    return jet_compose(a, e, e, e);
}
inline Jet2 reciprocal(const Jet2& a) {
    double iv = 1.0 / a.v;
    return jet_compose(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}
inline Jet2 sqr(const Jet2& a) { return a * a; }

/// Complex 1-jet: value and gradient only.  Results of applying a complex
/// frame vector to a 2-jet; a second application then yields a plain value.
struct CJet1 {
    cplx v{};
    std::array<cplx, 4> g{};

    CJet1() = default;
    explicit CJet1(cplx c) : v(c) {}

    CJet1& operator+=(const CJet1& o) {
        v += o.v;
        for (int i = 0; i < 4; ++i) g[i] += o.g[i];
        return *this;
    }
    friend CJet1 operator+(CJet1 a, const CJet1& b) { return a += b; }
    friend CJet1 operator-(CJet1 a, const CJet1& b) {
        a.v -= b.v;
        for (int i = 0; i < 4; ++i) a.g[i] -= b.g[i];
        return a;
    }
    friend CJet1 operator*(cplx s, CJet1 a) {
        a.v *= s;
        for (int i = 0; i < 4; ++i) a.g[i] *= s;
        return a;
    }
    friend CJet1 operator*(const CJet1& a, const CJet1& b) {
        CJet1 r;
        r.v = a.v * b.v;
        for (int i = 0; i < 4; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
        return r;
    }
    CJet1 conj() const {
        CJet1 r;
        r.v = std::conj(v);
        for (int i = 0; i < 4; ++i) r.g[i] = std::conj(g[i]);
        return r;
    }
};

inline CJet1 to_cjet1(const Jet2& a) {
    CJet1 r(a.v);
    for (int i = 0; i < 4; ++i) r.g[i] = a.g[i];
    return r;
}

/// Complex 2-jet (for complex-valued test functions u_j on a box).
struct CJet2 {
    cplx v{};
    std::array<cplx, 4> g{};
    std::array<std::array<cplx, 4>, 4> h{};

    CJet2() = default;
    CJet2(const Jet2& re, const Jet2& im) {
        v = cplx(re.v, im.v);
        for (int i = 0; i < 4; ++i) {
            g[i] = cplx(re.g[i], im.g[i]);
            for (int j = 0; j < 4; ++j) h[i][j] = cplx(re.h[i][j], im.h[i][j]);
        }
    }
    explicit CJet2(const Jet2& re) : CJet2(re, Jet2(0.0)) {}
    CJet2 conj() const {
        CJet2 r;
        r.v = std::conj(v);
        for (int i = 0; i < 4; ++i) {
            r.g[i] = std::conj(g[i]);
            for (int j = 0; j < 4; ++j) r.h[i][j] = std::conj(h[i][j]);
        }
        return r;
    }
};

/// First-order operator with complex coefficient 1-jets: L = sum_c E[c] d/dx_c.
using CVec1 = std::array<CJet1, 4>;

inline CVec1 cvec_conj(const CVec1& e) {
    CVec1 r;
    for (int c = 0; c < 4; ++c) r[c] = e[c].conj();
    return r;
}

/// Apply L to a real or complex 2-jet; the result keeps one derivative order.
inline CJet1 apply_vec(const CVec1& e, const CJet2& u) {
    CJet1 r;
    for (int c = 0; c < 4; ++c) {
        r.v += e[c].v * u.g[c];
        for (int d = 0; d < 4; ++d) r.g[d] += e[c].g[d] * u.g[c] + e[c].v * u.h[c][d];
    }
    return r;
}
inline CJet1 apply_vec(const CVec1& e, const Jet2& u) { return apply_vec(e, CJet2(u)); }

/// Apply L to a complex 1-jet; only the value survives.
inline cplx apply_vec_value(const CVec1& e, const CJet1& u) {
    cplx r = 0;
    for (int c = 0; c < 4; ++c) r += e[c].v * u.g[c];
    return r;
}

/// Coordinate divergence of L (flat measure): sum_c d(E[c])/dx_c.
inline cplx vec_divergence(const CVec1& e) {
    cplx r = 0;
    for (int c = 0; c < 4; ++c) r += e[c].g[c];
    return r;
}

}  // namespace ac4
