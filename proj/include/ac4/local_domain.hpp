#pragma once
// Bounded-domain computations on a chart box: the divergence lemmas, the
// weighted adjoint of W~ under a plurisubharmonic weight, and the full
// term-by-term evaluation of the weighted estimate, including both boundary
// readings and the divergence terms.
//
// Domains are boxes in the active coordinates (t, x, y) times the full
// periodic z-circle; all corpus data is z-invariant, so every operator
// identity is the 4-dimensional one restricted to that sector.  Integrands
// are differentiated analytically through second-order jets: quadrature is
// the only discretization error here.
//
// Derived integration-by-parts rule used throughout ((f,g) with weight
// e^{-phi}, delta_j v = e_j v - (e_j phi) v + c_j v):
//  (f1, delta_j f2) = -(ebar_j f1, f2) + <(ebar_j r) f1 f2bar>_boundary
//                     - (div(ebar_j) f1, f2) + (conj(c_j) f1, f2).
// Swapping twice yields, per index pair (i,j),
//  (delta_i u_i, delta_j u_j) = (ebar_j u_i, ebar_i u_j) + ((delta_i ebar_j
//      - ebar_j delta_i) u_i, u_j) + [BD1 - conj(BD2)] + [conj(DV2) - DV1]
//      + [CT1 - conj(CT2)],
// which is the equality line the report verifies.

#include "ac4/frame_calculus.hpp"
#include "ac4/jets.hpp"

namespace ac4 {

using RealFn = std::function<Jet2(const std::array<Jet2, 4>&)>;
using ComplexFn = std::function<CJet2(const std::array<Jet2, 4>&)>;

// ---------------------------------------------------------------------------
// chart frames with constant structure data

struct ChartFrame {
    std::string chart;  // catalog id
    // constant complex-frame structure data, extracted from the grid module
    cplx C_mix[2][2][2];     // theta^s([e_i, ebar_j])
    cplx Cbar_mix[2][2][2];  // thetabar^s([e_i, ebar_j])
    cplx C_hol[2][2][2];     // theta^s([e_i, e_j])
    cplx Cbar_hol[2][2][2];
    cplx c[2];  // sum_k Cbar_mix[j][k][k]

    /// Complex frame vector e_j as first-order operator coefficient jets.
    CVec1 vec(int j, const std::array<Jet2, 4>& x) const {
        const double s = 1.0 / std::sqrt(2.0);
        CVec1 e{};
        if (j == 0) {
            e[0] = CJet1(cplx(s, 0));
            e[1] = CJet1(cplx(0, s));
        } else if (chart == "kodaira_thurston") {
            e[2] = CJet1(cplx(s, 0));
            // coefficient (x + i)/sqrt2 on d/dz, with its x-gradient
            CJet1 cz(cplx(x[1].v * s, s));
            cz.g[1] = s;
            e[3] = cz;
        } else {
            e[2] = CJet1(cplx(s, 0));
            e[3] = CJet1(cplx(0, s));
        }
        return e;
    }
};

/// Extracts the constant structure data of a catalog member; throws when
/// the coefficients vary over the grid (no analytic chart frame stored).
inline ChartFrame chart_frame(const Manifold& M, const StructureCoefficients& S) {
    ChartFrame cf;
    cf.chart = M.name;
    if (M.name != "flat_torus_kahler" && M.name != "kodaira_thurston")
        throw config_error("chart frames are stored for the constant-structure members only");
    auto constant = [&](const Field& f) {
        cplx v0 = f[0];
        for (auto& v : f.v)
            if (std::abs(v - v0) > 1e-10)
                throw numerical_error("chart_frame: structure coefficient varies");
        return v0;
    };
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                cf.C_mix[s][i][j] = constant(S.C_mix[s][i][j]);
                cf.Cbar_mix[s][i][j] = constant(S.Cbar_mix[s][i][j]);
                cf.C_hol[s][i][j] = constant(S.C_hol[s][i][j]);
                cf.Cbar_hol[s][i][j] = constant(S.Cbar_hol[s][i][j]);
            }
    for (int j = 0; j < 2; ++j) cf.c[j] = constant(S.c[j]);
    return cf;
}

// ---------------------------------------------------------------------------
// box domain and quadrature

struct BoxDomain {
    ChartFrame frame;
    double z_period = 1.0;
    std::array<double, 3> lo{0.1, 0.1, 0.1}, hi{0.9, 0.9, 0.9};
    int panels = 16;  // composite 2-point Gauss panels per active axis
    RealFn phi;       // weight (already scaled)
    double psh_min_eigenvalue = 0;  // certified on the quadrature nodes
};

namespace detail {

inline void gauss2(double a, double b, double* xs, double* ws) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double off = half / std::sqrt(3.0);
    xs[0] = mid - off;
    xs[1] = mid + off;
    ws[0] = ws[1] = half;
}

}  // namespace detail

/// Tensor quadrature over the box interior (weight includes the z-period).
template <class Fn>
inline void for_each_box_node(const BoxDomain& B, Fn&& fn) {
    int P = B.panels;
    std::array<std::vector<double>, 3> X, W;
    for (int c = 0; c < 3; ++c) {
        X[c].resize(2 * std::size_t(P));
        W[c].resize(2 * std::size_t(P));
        double h = (B.hi[c] - B.lo[c]) / P;
        for (int p = 0; p < P; ++p)
            detail::gauss2(B.lo[c] + p * h, B.lo[c] + (p + 1) * h, &X[c][2 * std::size_t(p)],
                           &W[c][2 * std::size_t(p)]);
    }
    std::array<Jet2, 4> x;
    x[3] = Jet2(0.0);  // z-invariant sector: no z variation
    for (std::size_t i0 = 0; i0 < X[0].size(); ++i0)
        for (std::size_t i1 = 0; i1 < X[1].size(); ++i1)
            for (std::size_t i2 = 0; i2 < X[2].size(); ++i2) {
                x[0] = Jet2::variable(0, X[0][i0]);
                x[1] = Jet2::variable(1, X[1][i1]);
                x[2] = Jet2::variable(2, X[2][i2]);
                fn(x, W[0][i0] * W[1][i1] * W[2][i2] * B.z_period);
            }
}

/// Face quadrature with the outward co-normal data: fn(x, weight, axis, side).
template <class Fn>
inline void for_each_face_node(const BoxDomain& B, Fn&& fn) {
    int P = B.panels;
    for (int axis = 0; axis < 3; ++axis)
        for (int side = 0; side < 2; ++side) {
            int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
            std::vector<double> X1(2 * std::size_t(P)), W1(2 * std::size_t(P)),
                X2(2 * std::size_t(P)), W2(2 * std::size_t(P));
            double h1 = (B.hi[a1] - B.lo[a1]) / P, h2 = (B.hi[a2] - B.lo[a2]) / P;
            for (int p = 0; p < P; ++p) {
                detail::gauss2(B.lo[a1] + p * h1, B.lo[a1] + (p + 1) * h1, &X1[2 * std::size_t(p)],
                               &W1[2 * std::size_t(p)]);
                detail::gauss2(B.lo[a2] + p * h2, B.lo[a2] + (p + 1) * h2, &X2[2 * std::size_t(p)],
                               &W2[2 * std::size_t(p)]);
            }
            std::array<Jet2, 4> x;
            x[3] = Jet2(0.0);
            for (std::size_t i1 = 0; i1 < X1.size(); ++i1)
                for (std::size_t i2 = 0; i2 < X2.size(); ++i2) {
                    x[axis] = Jet2::variable(axis, side ? B.hi[axis] : B.lo[axis]);
                    x[a1] = Jet2::variable(a1, X1[i1]);
                    x[a2] = Jet2::variable(a2, X2[i2]);
                    fn(x, W1[i1] * W2[i2] * B.z_period, axis, side);
                }
        }
}

/// (L r) on a face: the defining function r has unit outward co-gradient
/// d r = +- dx_axis there, so L r is the signed axis-coefficient of L.
inline cplx face_lr(const CVec1& L, int axis, int side) {
    return (side ? 1.0 : -1.0) * L[axis].v;
}

// ---------------------------------------------------------------------------
// divergence lemma

struct DivLemmaReport {
    double interior = 0;   // integral of L f over the box
    double boundary = 0;   // integral of (L r) f over the faces
    double divergence = 0; // integral of div(L) f
    double residual = 0;   // |interior - boundary + divergence|
};

/// Checks  int_Omega L f = int_dOmega (L r) f - int_Omega div(L) f  by
/// quadrature for a first-order operator with jet coefficients.
inline DivLemmaReport div_lemma_check(const BoxDomain& B,
                                      const std::function<CVec1(const std::array<Jet2, 4>&)>& L,
                                      const RealFn& f) {
    DivLemmaReport rep;
    cplx interior = 0, divterm = 0, boundary = 0;
    for_each_box_node(B, [&](const std::array<Jet2, 4>& x, double w) {
        CVec1 Lx = L(x);
        Jet2 fx = f(x);
        interior += w * apply_vec(Lx, fx).v;
        divterm += w * vec_divergence(Lx) * fx.v;
    });
    for_each_face_node(B, [&](const std::array<Jet2, 4>& x, double w, int axis, int side) {
        boundary += w * face_lr(L(x), axis, side) * f(x).v;
    });
    rep.interior = interior.real();
    rep.boundary = boundary.real();
    rep.divergence = divterm.real();
    rep.residual = std::abs(interior - boundary + divterm);
    return rep;
}

// ---------------------------------------------------------------------------
// weighted adjoint and the estimate table

struct BoxOneForm {
    ComplexFn u1, u2;  // components of the (0,1) part: a = u + ubar
    CJet2 component(int j, const std::array<Jet2, 4>& x) const {
        return j == 0 ? u1(x) : u2(x);
    }
};

namespace detail {

struct NodeCalc {
    const ChartFrame* cf;
    std::array<Jet2, 4> x;
    CVec1 e[2], ebar[2];
    CJet2 u[2];
    Jet2 phi;
    CJet1 ephi[2];  // e_j phi as a 1-jet

    NodeCalc(const ChartFrame& frame, const BoxOneForm& uu, const RealFn& w,
             const std::array<Jet2, 4>& xx)
        : cf(&frame), x(xx) {
        for (int j = 0; j < 2; ++j) {
            e[j] = frame.vec(j, x);
            ebar[j] = cvec_conj(e[j]);
            u[j] = uu.component(j, x);
        }
        phi = w ? w(x) : Jet2(0.0);
        for (int j = 0; j < 2; ++j) ephi[j] = apply_vec(e[j], phi);
    }

    CJet1 e_u(int j, int k) const { return apply_vec(e[j], u[k]); }
    CJet1 ebar_u(int j, int k) const { return apply_vec(ebar[j], u[k]); }

    /// delta_j applied to u_k, as a 1-jet:
    /// delta_j v = e_j v - (e_j phi) v + c_j v.
    CJet1 delta_u(int j, int k) const {
        CJet1 r = e_u(j, k);
        CJet1 uv;  // u_k as 1-jet
        uv.v = u[k].v;
        for (int d = 0; d < 4; ++d) uv.g[d] = u[k].g[d];
        CJet1 t = ephi[j] * uv;
        r.v -= t.v;
        for (int d = 0; d < 4; ++d) r.g[d] -= t.g[d];
        r.v += cf->c[j] * uv.v;
        for (int d = 0; d < 4; ++d) r.g[d] += cf->c[j] * uv.g[d];
        return r;
    }

    /// (delta_i ebar_j - ebar_j delta_i) u_k by direct composition (values).
    cplx commutator_direct(int i, int j, int k) const {
        CJet1 eb = ebar_u(j, k);
        // delta_i(ebar_j u_k): value only
        cplx d1 = apply_vec_value(e[i], eb) - ephi[i].v * eb.v + cf->c[i] * eb.v;
        CJet1 du = delta_u(i, k);
        cplx d2 = apply_vec_value(ebar[j], du);
        return d1 - d2;
    }

    /// The (0,2)-coefficient of da: G = ebar_1 u_2 - ebar_2 u_1 - a([ebar_1, ebar_2]).
    cplx dminus_coefficient() const {
        cplx G = ebar_u(0, 1).v - ebar_u(1, 0).v;
        // [ebar_1, ebar_2] = conj(C_hol) ebar_s + conj(Cbar_hol) e_s applied to a = u + ubar
        for (int s = 0; s < 2; ++s) {
            cplx cu = std::conj(cf->C_hol[s][0][1]);   // ebar_s coefficient
            cplx cb = std::conj(cf->Cbar_hol[s][0][1]);  // e_s coefficient
            G -= cu * u[s].v + cb * std::conj(u[s].v);
        }
        return G;
    }

    /// Lambda_F of d(e^{-t phi} a) at the node: i sum_i db(e_i, ebar_i),
    /// with b = e^{-t phi} a.  t = 0 gives the unweighted trace.
    cplx lambda_d_weighted(double t) const {
        cplx acc = 0;
        for (int i = 0; i < 2; ++i) {
            // b(ebar_i) = e^{-t phi} u_i; b(e_i) = e^{-t phi} conj(u_i)
            // db(e_i, ebar_i) = e_i(b(ebar_i)) - ebar_i(b(e_i)) - b([e_i, ebar_i])
            CJet1 bu;  // e^{-t phi} u_i as a 1-jet
            CJet1 bc;  // e^{-t phi} conj(u_i)
            Jet2 w = (-t) * phi;
            Jet2 ew = exp(w);
            for (int d = 0; d < 4; ++d) {
                bu.g[d] = ew.v * u[i].g[d] + ew.g[d] * u[i].v;
                bc.g[d] = ew.v * std::conj(u[i].g[d]) + ew.g[d] * std::conj(u[i].v);
            }
            bu.v = ew.v * u[i].v;
            bc.v = ew.v * std::conj(u[i].v);
            cplx term = apply_vec_value(e[i], bu) - apply_vec_value(ebar[i], bc);
            // bracket part: [e_i, ebar_i] applied to a, scaled by e^{-t phi}
            for (int s = 0; s < 2; ++s) {
                cplx coef_e = cf->C_mix[s][i][i];
                cplx coef_eb = cf->Cbar_mix[s][i][i];
                term -= ew.v * (coef_e * std::conj(u[s].v) + coef_eb * u[s].v);
            }
            acc += term;
        }
        return cplx(0, 1) * acc;
    }
};

}  // namespace detail

struct WeightedAdjointSample {
    cplx delta_route;  // -2 Im(sum_j delta_j u_j), as a complex number
    cplx trace_route;  // e^{phi} Lambda_F d^+_J(e^{-phi} a)
};

/// The weighted adjoint at one point, by the two independent routes: the
/// delta-expansion and the trace formula.  Their agreement is the
/// term-assembly check of the module.
inline WeightedAdjointSample weighted_adjoint_phi(const BoxDomain& B, const BoxOneForm& u,
                                                  const std::array<Jet2, 4>& x) {
    detail::NodeCalc nc(B.frame, u, B.phi, x);
    WeightedAdjointSample s;
    cplx S = nc.delta_u(0, 0).v + nc.delta_u(1, 1).v;
    s.delta_route = cplx(-2.0 * S.imag(), 0);
    s.trace_route = std::exp(nc.phi.v) * nc.lambda_d_weighted(1.0);
    return s;
}

struct LocalEstimateReport {
    // integral terms (real parts; weights e^{-phi} unless stated)
    double wstar_sq = 0;          // |W~*_phi a|^2 (real operator)
    double delta_sum_sq = 0;      // |sum_j delta_j u_j|^2  (balances the equality)
    double delta_indiv_minus = 0; // sum_ij |delta_i u_j|^2 e^{-phi}
    double delta_indiv_plus = 0;  // sum_ij |delta_i u_j|^2 e^{+phi} (printed variant)
    double dminus_sq = 0;         // |d^-_J a|^2 = 2 int |G|^2
    double ebar_sq = 0;           // sum_ij |ebar_i u_j|^2
    double commutator = 0;        // sum_ij ((delta_i ebar_j - ebar_j delta_i) u_i, u_j)
    double boundary_1 = 0;        // (ebar_j r)(delta_i u_i) conj(u_j), both readings
    double boundary_2 = 0;        // (ebar_i r) u_j conj(ebar_j u_i)
    double div_1 = 0;             // div(ebar_j)(delta_i u_i) conj(u_j)
    double div_2 = 0;             // div(ebar_i) u_j conj(ebar_j u_i)
    double c_terms = 0;           // the zeroth-order corrections of the swap
    double equality_residual = 0; // |delta_sum_sq - (sum of swap terms)| / scale
    double inequality_slack = 0;  // lhs - printed rhs groups (>= 0 expected)
    double adjoint_route_mismatch = 0;  // max |delta route - trace route|
};

inline LocalEstimateReport local_estimate_report(const BoxDomain& B, const BoxOneForm& u) {
    LocalEstimateReport rep;
    // interior accumulators per index pair for the swap identity
    cplx A[2][2] = {}, cross[2][2] = {}, comm[2][2] = {}, dv1[2][2] = {}, dv2[2][2] = {},
         ct1[2][2] = {}, ct2[2][2] = {};
    cplx bd1[2][2] = {}, bd2[2][2] = {};
    const ChartFrame& cf = B.frame;

    for_each_box_node(B, [&](const std::array<Jet2, 4>& x, double w) {
        detail::NodeCalc nc(cf, u, B.phi, x);
        double em = w * std::exp(-nc.phi.v);
        double ep = w * std::exp(+nc.phi.v);
        cplx S = nc.delta_u(0, 0).v + nc.delta_u(1, 1).v;
        rep.delta_sum_sq += em * std::norm(S);
        rep.wstar_sq += em * 4.0 * S.imag() * S.imag();
        cplx G = nc.dminus_coefficient();
        rep.dminus_sq += em * 2.0 * std::norm(G);
        auto ws = weighted_adjoint_phi(B, u, x);
        rep.adjoint_route_mismatch =
            std::max(rep.adjoint_route_mismatch, std::abs(ws.delta_route - ws.trace_route));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                cplx di = nc.delta_u(i, i).v, dj = nc.delta_u(j, j).v;
                cplx dij = nc.delta_u(i, j).v;
                rep.delta_indiv_minus += em * std::norm(dij);
                rep.delta_indiv_plus += ep * std::norm(dij);
                A[i][j] += em * di * std::conj(dj);
                cplx ebar_ju_i = nc.ebar_u(j, i).v, ebar_iu_j = nc.ebar_u(i, j).v;
                cross[i][j] += em * ebar_ju_i * std::conj(ebar_iu_j);
                comm[i][j] += em * nc.commutator_direct(i, j, i) * std::conj(nc.u[j].v);
                // divergence of ebar_j: zero on these charts but kept honest
                cplx divj = vec_divergence(nc.ebar[j]);
                cplx divi = vec_divergence(nc.ebar[i]);
                dv1[i][j] += em * divj * di * std::conj(nc.u[j].v);
                dv2[i][j] += em * divi * nc.u[j].v * std::conj(ebar_ju_i);
                ct1[i][j] += em * std::conj(cf.c[j]) * di * std::conj(nc.u[j].v);
                ct2[i][j] += em * std::conj(cf.c[i]) * nc.u[j].v * std::conj(ebar_ju_i);
            }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) rep.ebar_sq += em * std::norm(nc.ebar_u(i, j).v);
    });

    for_each_face_node(B, [&](const std::array<Jet2, 4>& x, double w, int axis, int side) {
        detail::NodeCalc nc(cf, u, B.phi, x);
        double em = w * std::exp(-nc.phi.v);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                cplx lr_j = face_lr(nc.ebar[j], axis, side);
                cplx lr_i = face_lr(nc.ebar[i], axis, side);
                bd1[i][j] += em * lr_j * nc.delta_u(i, i).v * std::conj(nc.u[j].v);
                bd2[i][j] += em * lr_i * nc.u[j].v * std::conj(nc.ebar_u(j, i).v);
            }
    });

    // assemble the swap identity residual and the report totals
    cplx asum = 0, rhs = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            asum += A[i][j];
            cplx pair = cross[i][j] + comm[i][j] + (bd1[i][j] - std::conj(bd2[i][j])) +
                        (std::conj(dv2[i][j]) - dv1[i][j]) + (ct1[i][j] - std::conj(ct2[i][j]));
            rhs += pair;
            rep.commutator += comm[i][j].real();
            rep.boundary_1 += bd1[i][j].real();
            rep.boundary_2 += bd2[i][j].real();
            rep.div_1 += dv1[i][j].real();
            rep.div_2 += dv2[i][j].real();
            rep.c_terms += (ct1[i][j] - std::conj(ct2[i][j])).real();
        }
    double scale = std::max({1.0, std::abs(asum), rep.ebar_sq});
    rep.equality_residual = std::abs(asum - rhs) / scale;

    // printed inequality direction: rhs groups <= |sum delta|^2 + |d^-_J a|^2
    double lhs = rep.delta_sum_sq + rep.dminus_sq;
    double printed_rhs = rep.ebar_sq + rep.commutator + (rep.boundary_1 - rep.boundary_2) +
                         (rep.div_2 - rep.div_1);
    rep.inequality_slack = (lhs - printed_rhs) / scale;
    return rep;
}

// ---------------------------------------------------------------------------
// plurisubharmonicity certificate and default corpus pieces

/// Minimum eigenvalue over the quadrature nodes of the del-delbar matrix
/// m_ij = e_i ebar_j phi - sum_l Cbar_mix[l][i][j] ebar_l phi.
inline double box_psh_min_eigenvalue(const BoxDomain& B, const RealFn& phi) {
    double worst = 1e300;
    for_each_box_node(B, [&](const std::array<Jet2, 4>& x, double) {
        detail::NodeCalc nc(B.frame, BoxOneForm{[](const std::array<Jet2, 4>&) { return CJet2(); },
                                                [](const std::array<Jet2, 4>&) { return CJet2(); }},
                            phi, x);
        cplx m[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CJet1 ebj = apply_vec(nc.ebar[j], nc.phi);
                m[i][j] = apply_vec_value(nc.e[i], ebj);
                for (int l = 0; l < 2; ++l) {
                    CJet1 ebl = apply_vec(nc.ebar[l], nc.phi);
                    m[i][j] -= B.frame.Cbar_mix[l][i][j] * ebl.v;
                }
            }
        double a = m[0][0].real(), d = m[1][1].real();
        cplx b = 0.5 * (m[0][1] + std::conj(m[1][0]));
        double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + std::norm(b)));
        worst = std::min(worst, 0.5 * (a + d) - disc);
    });
    return worst;
}

/// Quadratic chart-distance weight, scaled so the psh matrix clears 0.1.
inline RealFn default_weight(BoxDomain& B, double target = 0.1) {
    std::array<double, 3> c;
    for (int i = 0; i < 3; ++i) c[i] = 0.5 * (B.lo[i] + B.hi[i]);
    RealFn base = [c](const std::array<Jet2, 4>& x) {
        Jet2 r = sqr(x[0] - c[0]) + sqr(x[1] - c[1]) + sqr(x[2] - c[2]);
        return r;
    };
    double mineig = box_psh_min_eigenvalue(B, base);
    if (mineig <= 0)
        throw numerical_error("default weight is not plurisubharmonic on this chart");
    double scale = (target + 0.01) / mineig;
    RealFn scaled = [base, scale](const std::array<Jet2, 4>& x) { return scale * base(x); };
    B.phi = scaled;
    B.psh_min_eigenvalue = scale * mineig;
    return scaled;
}

/// Smooth bump supported in (-1,1), exp(1 - 1/(1-s^2)).
inline Jet2 bump1(const Jet2& s) {
    if (std::abs(s.v) >= 0.995) return Jet2(0.0);
    Jet2 one_minus = Jet2(1.0) - s * s;
    return exp(Jet2(1.0) - reciprocal(one_minus));
}

/// Compactly supported complex test component on the box.
inline ComplexFn bump_component(const BoxDomain& B, std::array<double, 3> freq, cplx amp) {
    auto lo = B.lo, hi = B.hi;
    return [lo, hi, freq, amp](const std::array<Jet2, 4>& x) {
        Jet2 prof(1.0);
        for (int c = 0; c < 3; ++c) {
            double mid = 0.5 * (lo[c] + hi[c]), half = 0.5 * (hi[c] - lo[c]);
            prof = prof * bump1((1.0 / half) * (x[c] - mid));
        }
        Jet2 osc(0.0);
        for (int c = 0; c < 3; ++c) osc += freq[c] * x[c];
        Jet2 re = prof * cos(2.0 * pi * osc);
        Jet2 im = prof * sin(2.0 * pi * osc);
        CJet2 r(re, im);
        CJet2 out;
        out.v = amp * r.v;
        for (int i = 0; i < 4; ++i) {
            out.g[i] = amp * r.g[i];
            for (int j = 0; j < 4; ++j) out.h[i][j] = amp * r.h[i][j];
        }
        return out;
    };
}

}  // namespace ac4
