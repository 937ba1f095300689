#pragma once
// Differential forms as coframe-component fields and the calculus on them:
// wedge, J action, Hodge star, exterior derivative (spectral coefficient
// derivatives plus the algebraic structure terms of the invariant coframe),
// codifferential, self-dual and J-type splittings, trace against F.

#include <functional>

#include "ac4/manifold.hpp"

namespace ac4 {

struct Form;
using FormOp = std::function<Form(const Form&)>;

struct Form {
    int p = 0;
    std::vector<Field> c;

    Form() = default;
    Form(const GridSpec& g, int degree) : p(degree), c(form_dim(degree), Field(g, 0.0)) {}

    int ncomp() const { return form_dim(p); }
    Form& operator+=(const Form& o) {
        for (int k = 0; k < ncomp(); ++k) c[k] += o.c[k];
        return *this;
    }
    Form& operator-=(const Form& o) {
        for (int k = 0; k < ncomp(); ++k) c[k] -= o.c[k];
        return *this;
    }
    Form& operator*=(cplx s) {
        for (auto& f : c) f *= s;
        return *this;
    }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(cplx s, Form a) { return a *= s; }
};

inline Form conjugate(Form a) {
    for (auto& f : a.c) f = conjugate(f);
    return a;
}

inline Form real_part(const Form& a) {
    Form r = a;
    for (auto& f : r.c)
        for (auto& x : f.v) x = cplx(x.real(), 0.0);
    return r;
}

inline double max_abs(const Form& a) {
    double m = 0;
    for (auto& f : a.c) m = std::max(m, max_abs(f));
    return m;
}

/// Form with the manifold's taming data as components.
inline Form fundamental_form(const Manifold& M) {
    Form f(M.grid, 2);
    for (int k = 0; k < 6; ++k) f.c[k] = M.F[k];
    return f;
}
inline Form taming_form(const Manifold& M) {
    Form f(M.grid, 2);
    for (int k = 0; k < 6; ++k) f.c[k] = M.omega[k];
    return f;
}
inline Form anti_invariant_part_of_omega(const Manifold& M) {
    Form f(M.grid, 2);
    for (int k = 0; k < 6; ++k) f.c[k] = M.omega_minus[k];
    return f;
}

// ---------------------------------------------------------------------------
// algebra

inline Form wedge(const GridSpec& g, const Form& a, const Form& b) {
    if (a.p + b.p > 4) throw error("wedge: degree overflow");
    Form r(g, a.p + b.p);
    for (int i = 0; i < a.ncomp(); ++i)
        for (int j = 0; j < b.ncomp(); ++j) {
            int sign;
            int k = wedge_component(a.p, i, b.p, j, sign);
            if (sign == 0) continue;
            Field prod = multiply(a.c[i], b.c[j]);
            if (sign < 0) prod *= -1.0;
            r.c[k] += prod;
        }
    return r;
}

/// (J psi)(v_1..v_p) = psi(J v_1 .. J v_p), pointwise compound action.
inline Form j_act(const Manifold& M, const Form& a) {
    Form r(M.grid, a.p);
    if (a.p == 0) {
        r.c[0] = a.c[0];
        return r;
    }
    int n = a.ncomp();
    std::vector<cplx> in(n), out(n);
    for (std::size_t i = 0; i < M.npoints(); ++i) {
        cplx J[16];
        for (int k = 0; k < 16; ++k) J[k] = M.Jmat[k][i];
        for (int k = 0; k < n; ++k) in[k] = a.c[k][i];
        compound_apply(a.p, J, in.data(), out.data());
        for (int k = 0; k < n; ++k) r.c[k][i] = out[k];
    }
    return r;
}

/// Pointwise inner product field of two equal-degree forms,
/// <a,b>(x) = sum_IJ a_I Gp^{IJ} conj(b_J).
inline Field pointwise_inner(const Manifold& M, const Form& a, const Form& b) {
    if (a.p != b.p) throw error("pointwise_inner: degree mismatch");
    Field r(M.grid, 0.0);
    int n = a.ncomp();
    for (std::size_t i = 0; i < M.npoints(); ++i) {
        cplx acc = 0;
        for (int I = 0; I < n; ++I)
            for (int J = 0; J < n; ++J) {
                cplx gp;
                if (a.p == 0)
                    gp = 1.0;
                else if (a.p == 1)
                    gp = M.ginv[I * 4 + J][i];
                else if (a.p == 2)
                    gp = M.gram2[I * 6 + J][i];
                else if (a.p == 3)
                    gp = M.gram3[I * 4 + J][i];
                else
                    gp = M.gram4[i];
                acc += a.c[I][i] * gp * std::conj(b.c[J][i]);
            }
        r[i] = acc;
    }
    return r;
}

/// Global L2 pairing with the metric volume.
inline cplx l2_inner(const Manifold& M, const Form& a, const Form& b) {
    Field f = pointwise_inner(M, a, b);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= M.rho[i];
    return integrate(f, M.grid);
}
inline double l2_norm(const Manifold& M, const Form& a) {
    return std::sqrt(std::max(0.0, l2_inner(M, a, a).real()));
}
inline cplx l2_inner(const Manifold& M, const Field& a, const Field& b) {
    Field f = multiply(a, conjugate(b));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= M.rho[i];
    return integrate(f, M.grid);
}
inline double l2_norm(const Manifold& M, const Field& a) {
    return std::sqrt(std::max(0.0, l2_inner(M, a, a).real()));
}

inline Field mean_zero(const Manifold& M, const Field& f) {
    // metric-volume mean
    Field w = M.rho;
    cplx vol = integrate(w, M.grid);
    Field fw = multiply(f, M.rho);
    cplx m = integrate(fw, M.grid) / vol;
    Field r = f;
    for (auto& x : r.v) x -= m;
    return r;
}

/// Hodge star, beta ^ (*alpha) = <beta, alpha> vol.
inline Form hodge_star(const Manifold& M, const Form& a) {
    Form r(M.grid, 4 - a.p);
    int n = a.ncomp();
    for (int I = 0; I < n; ++I) {
        int sgn;
        int Ic = complement(a.p, I, sgn);
        // (*a)_{I^c} = rho * sign * sum_J Gp^{IJ} a_J
        for (int J = 0; J < n; ++J) {
            for (std::size_t i = 0; i < M.npoints(); ++i) {
                cplx gp;
                if (a.p == 0)
                    gp = 1.0;
                else if (a.p == 1)
                    gp = M.ginv[I * 4 + J][i];
                else if (a.p == 2)
                    gp = M.gram2[I * 6 + J][i];
                else if (a.p == 3)
                    gp = M.gram3[I * 4 + J][i];
                else
                    gp = M.gram4[i];
                r.c[Ic][i] += double(sgn) * M.rho[i] * gp * a.c[J][i];
            }
        }
    }
    return r;
}

inline Form volume_form(const Manifold& M) {
    Form one(M.grid, 0);
    for (auto& x : one.c[0].v) x = 1.0;
    return hodge_star(M, one);
}

// ---------------------------------------------------------------------------
// exterior derivative and codifferential

inline Form exterior_d(const Manifold& M, const Form& a) {
    if (a.p >= 4) return Form(M.grid, 4);  // degenerate; kept total
    Form r(M.grid, a.p + 1);
    // coefficient derivatives: sum_b eps^b ^ (e_b a_I) eps^I
    for (int I = 0; I < a.ncomp(); ++I) {
        for (int b = 0; b < 4; ++b) {
            if (!frame_derivation_nonzero(M, b)) continue;
            int sgn;
            int K = wedge_component(1, b, a.p, I, sgn);
            if (sgn == 0) continue;
            Field d = frame_apply(M, b, a.c[I]);
            if (sgn < 0) d *= -1.0;
            r.c[K] += d;
        }
    }
    // structure terms: a_I d(eps^I), with d eps^{i_k} moved to the front
    for (int I = 0; I < a.ncomp(); ++I) {
        const int* lab = multi_index(a.p, I);
        for (int k = 0; k < a.p; ++k) {
            int ik = lab[k];
            int rest[3], nr = 0;
            for (int t = 0; t < a.p; ++t)
                if (t != k) rest[nr++] = lab[t];
            for (int m = 0; m < 6; ++m) {
                if (!M.dcoframe_nz[ik][m]) continue;
                int labels[4] = {idx2[m][0], idx2[m][1], 0, 0};
                for (int t = 0; t < nr; ++t) labels[2 + t] = rest[t];
                int sgn;
                int K = component_of(a.p + 1, labels, sgn);
                if (sgn == 0) continue;
                double s = double(sgn) * ((k % 2 == 0) ? 1.0 : -1.0);
                Field prod = multiply(a.c[I], M.dcoframe[ik][m]);
                prod *= s;
                r.c[K] += prod;
            }
        }
    }
    return r;
}

/// Codifferential, the formal L2 adjoint of d: d* = -*d* on every degree of
/// an oriented Riemannian 4-manifold.
inline Form codifferential(const Manifold& M, const Form& a) {
    if (a.p == 0) return Form(M.grid, 0);  // zero by convention
    Form r = hodge_star(M, exterior_d(M, hodge_star(M, a)));
    r *= -1.0;
    return r;
}

// ---------------------------------------------------------------------------
// splittings

/// Self-dual / anti-self-dual split of a 2-form.
inline std::pair<Form, Form> split_pm(const Manifold& M, const Form& b) {
    Form sb = hodge_star(M, b);
    Form plus = b, minus = b;
    plus += sb;
    minus -= sb;
    plus *= 0.5;
    minus *= 0.5;
    return {plus, minus};
}

/// J-invariant (real (1,1)) and J-anti-invariant ((2,0)+(0,2)) parts.
inline Form invariant_part(const Manifold& M, const Form& b) {
    Form jb = j_act(M, b);
    Form r = b;
    r += jb;
    r *= 0.5;
    return r;
}
inline Form anti_invariant_part(const Manifold& M, const Form& b) {
    Form jb = j_act(M, b);
    Form r = b;
    r -= jb;
    r *= 0.5;
    return r;
}

/// Trace against F: Lambda_F beta = <beta, F> pointwise; Lambda_F F = 2.
inline Field lambda_contract(const Manifold& M, const Form& b) {
    return pointwise_inner(M, b, fundamental_form(M));
}

inline Form scalar_times(const Field& s, const Form& a) {
    Form r = a;
    for (auto& f : r.c) f = multiply(s, f);
    return r;
}

struct TypeComponents {
    Form p11;        // real (1,1) part (J-invariant)
    Form p20, p02;   // complex (2,0) and (0,2) parts
    Field trace;     // Lambda_F beta
    Form f_part;     // (trace/2) F
    Form primitive;  // p11 - f_part, in ker(Lambda_F)
};

/// Value of a 2-form on two complex vectors given in frame components.
inline Field two_form_on(const Manifold& M, const Form& b, const std::array<Field, 4>& v,
                         const std::array<Field, 4>& w, bool conj_v, bool conj_w) {
    Field r(M.grid, 0.0);
    for (int k = 0; k < 6; ++k) {
        int a = idx2[k][0], c = idx2[k][1];
        for (std::size_t i = 0; i < r.size(); ++i) {
            cplx va = conj_v ? std::conj(v[a][i]) : v[a][i];
            cplx vc = conj_v ? std::conj(v[c][i]) : v[c][i];
            cplx wa = conj_w ? std::conj(w[a][i]) : w[a][i];
            cplx wc = conj_w ? std::conj(w[c][i]) : w[c][i];
            r[i] += b.c[k][i] * (va * wc - vc * wa);
        }
    }
    return r;
}

/// theta^i ^ theta(bar)^j as a coframe-component complex 2-form.
inline Form coframe_wedge(const Manifold& M, int i, bool bar_i, int j, bool bar_j) {
    Form r(M.grid, 2);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            int sgn;
            int lab[2] = {a, b};
            int K = component_of(2, lab, sgn);
            for (std::size_t q = 0; q < M.npoints(); ++q) {
                cplx ta = bar_i ? std::conj(M.Th[i][a][q]) : M.Th[i][a][q];
                cplx tb = bar_j ? std::conj(M.Th[j][b][q]) : M.Th[j][b][q];
                r.c[K][q] += double(sgn) * ta * tb;
            }
        }
    return r;
}

inline TypeComponents split_type(const Manifold& M, const Form& b) {
    TypeComponents tc;
    tc.p11 = invariant_part(M, b);
    Field s20 = two_form_on(M, b, M.U[0], M.U[1], false, false);  // beta(e1,e2)
    Field s02 = two_form_on(M, b, M.U[0], M.U[1], true, true);    // beta(e1bar,e2bar)
    Form t12 = coframe_wedge(M, 0, false, 1, false);
    Form t12bar = coframe_wedge(M, 0, true, 1, true);
    tc.p20 = scalar_times(s20, t12);
    tc.p02 = scalar_times(s02, t12bar);
    tc.trace = lambda_contract(M, b);
    Field half = tc.trace;
    half *= 0.5;
    tc.f_part = scalar_times(half, fundamental_form(M));
    tc.primitive = tc.p11 - tc.f_part;
    return tc;
}

// ---------------------------------------------------------------------------
// operators on 1-forms

inline Form d_plus(const Manifold& M, const Form& a) {
    Form da = exterior_d(M, a);
    Form sda = hodge_star(M, da);
    Form r = da;
    r += sda;
    r *= 0.5;
    return r;
}
inline Form d_minus(const Manifold& M, const Form& a) {
    Form da = exterior_d(M, a);
    Form sda = hodge_star(M, da);
    Form r = da;
    r -= sda;
    r *= 0.5;
    return r;
}
/// d^+_J a = (da)^{(1,1)}, d^-_J a = (da)^{(2,0)+(0,2)}.
inline Form d_plus_j(const Manifold& M, const Form& a) {
    return invariant_part(M, exterior_d(M, a));
}
inline Form d_minus_j(const Manifold& M, const Form& a) {
    return anti_invariant_part(M, exterior_d(M, a));
}

/// df as a 1-form from a scalar field.
inline Form d_scalar(const Manifold& M, const Field& f) {
    Form a(M.grid, 0);
    a.c[0] = f;
    return exterior_d(M, a);
}

/// Random real band-limited p-form (component-wise synthesis).
inline Form random_form(const Manifold& M, int p, int kmax, std::mt19937_64& rng) {
    Form r(M.grid, p);
    for (auto& f : r.c) f = random_band_field(M.grid, kmax, rng, false);
    return r;
}

}  // namespace ac4
