#pragma once
// Bracket-level data of the complex frame: structure coefficients, the
// Nijenhuis tensor, del-delbar on functions, the weighted delta_j operator,
// and the Chern connection with its bracket correction term.
//
// Coefficient conventions (theta^s is the dual coframe of e_1, e_2):
//   C_mix[s][i][j]    = theta^s([e_i, ebar_j])        ("C^s_{i jbar}")
//   Cbar_mix[s][i][j] = thetabar^s([e_i, ebar_j])     ("C^{sbar}_{i jbar}")
//   C_hol[s][i][j]    = theta^s([e_i, e_j])           ("C^s_{ij}")
//   Cbar_hol[s][i][j] = thetabar^s([e_i, e_j])        (the Nijenhuis data)
//   N[s]              = -theta^s([ebar_1, ebar_2])
//   c[j]              = sum_k Cbar_mix[j][k][k], the divergence-type term of
//                       the weighted adjoint.

#include "ac4/forms.hpp"

namespace ac4 {

struct StructureCoefficients {
    // real-frame bracket coefficients [e_a, e_b] = sum_s B[s](a,b) e_s
    std::array<std::array<std::array<Field, 4>, 4>, 4> B_real;
    double dcoframe_consistency = 0;  // max |B^s_ab + d eps^s(e_a,e_b)|

    std::array<std::array<std::array<Field, 2>, 2>, 2> C_mix, Cbar_mix, C_hol, Cbar_hol;
    std::array<Field, 2> N;
    std::array<Field, 2> c;
    std::array<Field, 2> div_cframe;  // div(e_j), metric volume
};

namespace detail {

/// Brackets of the real frame derivations from the stored coefficient
/// fields and their analytic gradients, converted to frame components by a
/// pointwise solve against the frame matrix.
inline void real_brackets(const Manifold& M, StructureCoefficients& S) {
    const auto& g = M.grid;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int s = 0; s < 4; ++s) S.B_real[a][b][s] = Field(g, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx Mmat[16];  // M[c][a] = coefficient of d/dx_c in e_a
        for (int c = 0; c < 4; ++c)
            for (int a = 0; a < 4; ++a) Mmat[c * 4 + a] = M.frame_coef[a][c][i];
        cplx Mi[16];
        if (!invert4(Mmat, Mi)) throw numerical_error("structure coefficients: frame degenerate");
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                cplx br[4];
                for (int c = 0; c < 4; ++c) {
                    cplx acc = 0;
                    for (int d = 0; d < 4; ++d)
                        acc += M.frame_coef[a][d][i] * M.frame_coef_grad[b][c][d][i] -
                               M.frame_coef[b][d][i] * M.frame_coef_grad[a][c][d][i];
                    br[c] = acc;
                }
                for (int s = 0; s < 4; ++s) {
                    cplx acc = 0;
                    for (int c = 0; c < 4; ++c) acc += Mi[s * 4 + c] * br[c];
                    S.B_real[a][b][s][i] = acc;
                    S.B_real[b][a][s][i] = -acc;
                }
            }
    }
    // cross-check against the structure 2-forms: d eps^s(e_a,e_b) = -B^s_ab
    double worst = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            for (int s = 0; s < 4; ++s) {
                int sgn;
                int lab[2] = {a, b};
                int k = component_of(2, lab, sgn);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    cplx deps = double(sgn) * M.dcoframe[s][k][i];
                    worst = std::max(worst, std::abs(S.B_real[a][b][s][i] + deps));
                }
            }
    S.dcoframe_consistency = worst;
}

}  // namespace detail

/// Full bracket of two complex frame combinations (frame components with
/// spectrally differentiated coefficients), as frame-component fields.
inline std::array<Field, 4> cframe_bracket(const Manifold& M, const StructureCoefficients& S,
                                           const std::array<Field, 4>& X,
                                           const std::array<Field, 4>& Y) {
    const auto& g = M.grid;
    std::array<Field, 4> out;
    for (auto& f : out) f = Field(g, 0.0);
    // derivative terms: X(Y^b) e_b - Y(X^b) e_b
    for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
            if (!frame_derivation_nonzero(M, a)) continue;
            Field dy = frame_apply(M, a, Y[b]);
            Field dx = frame_apply(M, a, X[b]);
            for (std::size_t i = 0; i < g.size(); ++i)
                out[b][i] += X[a][i] * dy[i] - Y[a][i] * dx[i];
        }
    }
    // structure terms: X^a Y^b [e_a, e_b]
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            for (int s = 0; s < 4; ++s) {
                for (std::size_t i = 0; i < g.size(); ++i)
                    out[s][i] += X[a][i] * Y[b][i] * S.B_real[a][b][s][i];
            }
        }
    return out;
}

inline StructureCoefficients structure_coefficients(const Manifold& M) {
    StructureCoefficients S;
    detail::real_brackets(M, S);
    const auto& g = M.grid;

    auto conj_frame = [&](int j) {
        std::array<Field, 4> r;
        for (int a = 0; a < 4; ++a) r[a] = conjugate(M.U[j][a]);
        return r;
    };
    auto theta_pair = [&](int s, bool bar, const std::array<Field, 4>& v) {
        Field r(g, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx acc = 0;
            for (int a = 0; a < 4; ++a) {
                cplx th = bar ? std::conj(M.Th[s][a][i]) : M.Th[s][a][i];
                acc += th * v[a][i];
            }
            r[i] = acc;
        }
        return r;
    };

    for (int i2 = 0; i2 < 2; ++i2)
        for (int j2 = 0; j2 < 2; ++j2) {
            auto br = cframe_bracket(M, S, M.U[i2], conj_frame(j2));
            for (int s = 0; s < 2; ++s) {
                S.C_mix[s][i2][j2] = theta_pair(s, false, br);
                S.Cbar_mix[s][i2][j2] = theta_pair(s, true, br);
            }
        }
    {
        auto br = cframe_bracket(M, S, M.U[0], M.U[1]);
        for (int s = 0; s < 2; ++s) {
            S.C_hol[s][0][1] = theta_pair(s, false, br);
            S.Cbar_hol[s][0][1] = theta_pair(s, true, br);
            S.C_hol[s][1][0] = -1.0 * S.C_hol[s][0][1];
            S.Cbar_hol[s][1][0] = -1.0 * S.Cbar_hol[s][0][1];
            S.C_hol[s][0][0] = Field(g, 0.0);
            S.C_hol[s][1][1] = Field(g, 0.0);
            S.Cbar_hol[s][0][0] = Field(g, 0.0);
            S.Cbar_hol[s][1][1] = Field(g, 0.0);
        }
    }
    {
        auto br = cframe_bracket(M, S, conj_frame(0), conj_frame(1));
        for (int s = 0; s < 2; ++s) {
            S.N[s] = theta_pair(s, false, br);
            S.N[s] *= -1.0;
        }
    }
    for (int j = 0; j < 2; ++j) {
        S.c[j] = Field(g, 0.0);
        for (int k = 0; k < 2; ++k) S.c[j] += S.Cbar_mix[j][k][k];
    }
    // div(e_j) = sum_a U_j^a div(e_a) + e_a(U_j^a)
    for (int j = 0; j < 2; ++j) {
        S.div_cframe[j] = Field(g, 0.0);
        for (int a = 0; a < 4; ++a) {
            Field d = frame_divergence(M, a);
            for (std::size_t i = 0; i < g.size(); ++i)
                S.div_cframe[j][i] += M.U[j][a][i] * d[i];
            S.div_cframe[j] += frame_apply(M, a, M.U[j][a]);
        }
    }
    return S;
}

/// Max amplitude of the Nijenhuis coefficients.
inline double nijenhuis_norm(const StructureCoefficients& S) {
    return std::max(max_abs(S.N[0]), max_abs(S.N[1]));
}

/// Integrability detector independent of the coefficient extraction: the
/// (0,2) part of d applied to the (1,0) part of df.
inline double integrability_defect(const Manifold& M, const Field& f) {
    // alpha = (e_j f) theta^j
    Form alpha(M.grid, 1);
    for (int j = 0; j < 2; ++j) {
        Field ej = cframe_apply(M, j, false, f);
        for (int a = 0; a < 4; ++a)
            for (std::size_t i = 0; i < M.npoints(); ++i)
                alpha.c[a][i] += ej[i] * M.Th[j][a][i];
    }
    Form da = exterior_d(M, alpha);
    Field s02 = two_form_on(M, da, M.U[0], M.U[1], true, true);
    return max_abs(s02);
}

// ---------------------------------------------------------------------------
// del delbar on functions

struct DelDelbarResult {
    Form form;                                   // the (1,1)-form
    std::array<std::array<Field, 2>, 2> matrix;  // coefficients m_ij on theta^i ^ thetabar^j
};

/// (1,1)-Hessian of a function in the frame: m_ij = e_i ebar_j phi -
/// sum_l Cbar_mix[l][i][j] ebar_l phi, as a form sum m_ij theta^i^thetabar^j.
inline DelDelbarResult del_delbar(const Manifold& M, const StructureCoefficients& S,
                                  const Field& phi) {
    DelDelbarResult R;
    R.form = Form(M.grid, 2);
    std::array<Field, 2> ebar_phi;
    for (int l = 0; l < 2; ++l) ebar_phi[l] = cframe_apply(M, l, true, phi);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Field m = cframe_apply(M, i, false, ebar_phi[j]);
            for (int l = 0; l < 2; ++l) {
                for (std::size_t q = 0; q < M.npoints(); ++q)
                    m[q] -= S.Cbar_mix[l][i][j][q] * ebar_phi[l][q];
            }
            R.matrix[i][j] = m;
            Form basis = coframe_wedge(M, i, false, j, true);
            R.form += scalar_times(m, basis);
        }
    return R;
}

/// Minimum eigenvalue of the del-delbar coefficient matrix over the grid
/// (Hermitian 2x2); positive means strictly J-plurisubharmonic.
inline double psh_min_eigenvalue(const Manifold& M, const DelDelbarResult& R) {
    double worst = 1e300;
    for (std::size_t q = 0; q < M.npoints(); ++q) {
        double a = R.matrix[0][0][q].real();
        double d = R.matrix[1][1][q].real();
        cplx b = 0.5 * (R.matrix[0][1][q] + std::conj(R.matrix[1][0][q]));
        double tr = a + d;
        double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) / 4 + std::norm(b)));
        worst = std::min(worst, tr / 2 - disc);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// delta_j and the commutator check (grid versions)

/// delta_j u = e_j u - (e_j phi) u + c_j u.
inline Field delta_op(const Manifold& M, const StructureCoefficients& S, int j, const Field& u,
                      const Field& phi) {
    Field r = cframe_apply(M, j, false, u);
    Field ephi = cframe_apply(M, j, false, phi);
    for (std::size_t q = 0; q < M.npoints(); ++q) r[q] += (S.c[j][q] - ephi[q]) * u[q];
    return r;
}

struct CommutatorReport {
    double residual;              // |direct - expansion| max over the grid
    double first_order_max;       // bracket first-order terms applied to u
    double first_order_coef_max;  // amplitude of the bracket coefficients
    double phi_term_max;          // magnitude of the (ebar_j e_i phi) u term
};

/// (delta_i ebar_j - ebar_j delta_i) u evaluated two ways: by operator
/// composition and by the re-derived expansion
///   [e_i, ebar_j] u + (ebar_j e_i phi) u - (ebar_j c_i) u.
inline CommutatorReport commutator_check(const Manifold& M, const StructureCoefficients& S, int i,
                                         int j, const Field& u, const Field& phi) {
    Field ebar_u = cframe_apply(M, j, true, u);
    Field lhs = delta_op(M, S, i, ebar_u, phi) - cframe_apply(M, j, true, delta_op(M, S, i, u, phi));

    Field ebar_k_u0 = cframe_apply(M, 0, true, u);
    Field ebar_k_u1 = cframe_apply(M, 1, true, u);
    Field ei_phi = cframe_apply(M, i, false, phi);
    Field ebar_ei_phi = cframe_apply(M, j, true, ei_phi);
    Field ebar_ci = cframe_apply(M, j, true, S.c[i]);
    Field e0u = cframe_apply(M, 0, false, u);
    Field e1u = cframe_apply(M, 1, false, u);

    Field rhs(M.grid, 0.0);
    double fo = 0, foc = 0, pt = 0;
    for (std::size_t q = 0; q < M.npoints(); ++q) {
        cplx bracket = S.C_mix[0][i][j][q] * e0u[q] + S.C_mix[1][i][j][q] * e1u[q] +
                       S.Cbar_mix[0][i][j][q] * ebar_k_u0[q] + S.Cbar_mix[1][i][j][q] * ebar_k_u1[q];
        cplx phi_term = ebar_ei_phi[q] * u[q];
        rhs[q] = bracket + phi_term - ebar_ci[q] * u[q];
        fo = std::max(fo, std::abs(bracket));
        for (int s2 = 0; s2 < 2; ++s2)
            foc = std::max({foc, std::abs(S.C_mix[s2][i][j][q]), std::abs(S.Cbar_mix[s2][i][j][q])});
        pt = std::max(pt, std::abs(phi_term));
    }
    Field d = lhs - rhs;
    return {max_abs(d), fo, foc, pt};
}

// ---------------------------------------------------------------------------
// Chern connection

struct ChernConnection {
    // gamma[k][i][j]: coefficient of e_k in nabla_{e_i} e_j
    std::array<std::array<std::array<Field, 2>, 2>, 2> gamma;
    double metric_residual = 0;  // full nabla g = 0 check, both derivative types
};

/// Chern connection coefficients from the metric-compatibility formula with
/// the bracket correction:
///   Gamma^k_ij = g^{k lbar} e_i(g_{j lbar}) - g^{k lbar} g_{j rbar} B^{rbar}_{i lbar},
/// for a supplied complex frame Z (frame components) and Hermitian pairing
/// h[j][l] = g_C(Z_j, Zbar_l).  The torsion inputs B come from the frame's
/// own brackets.
inline ChernConnection chern_connection(const Manifold& M, const StructureCoefficients& S,
                                        const std::array<std::array<Field, 4>, 2>& Z,
                                        const Field& conformal_log = Field()) {
    const auto& g = M.grid;
    bool scaled = conformal_log.size() == g.size();
    // Hermitian metric h_{j lbar} = e^{2 lambda} g(Z_j, Zbar_l)
    std::array<std::array<Field, 2>, 2> h;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) {
            h[j][l] = Field(g, 0.0);
            for (std::size_t q = 0; q < g.size(); ++q) {
                cplx acc = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        acc += Z[j][a][q] * M.gmat[a * 4 + b][q] * std::conj(Z[l][b][q]);
                if (scaled) acc *= std::exp(2.0 * conformal_log[q].real());
                h[j][l][q] = acc;
            }
        }
    // brackets of the frame Z
    auto conjZ = [&](int j) {
        std::array<Field, 4> r;
        for (int a = 0; a < 4; ++a) r[a] = conjugate(Z[j][a]);
        return r;
    };
    // Bbar[r][i][l] = coefficient of Zbar_r in [Z_i, Zbar_l]
    std::array<std::array<std::array<Field, 2>, 2>, 2> Bbar, Bhol;
    // dual coframe of Z for coefficient extraction
    auto dual = dual_coframe(M, Z);
    auto extract = [&](int s, bool bar, const std::array<Field, 4>& v) {
        Field r(g, 0.0);
        for (std::size_t q = 0; q < g.size(); ++q) {
            cplx acc = 0;
            for (int a = 0; a < 4; ++a) {
                cplx th = bar ? std::conj(dual.theta[s][a][q]) : dual.theta[s][a][q];
                acc += th * v[a][q];
            }
            r[q] = acc;
        }
        return r;
    };
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l) {
            auto br = cframe_bracket(M, S, Z[i], conjZ(l));
            for (int r = 0; r < 2; ++r) {
                Bbar[r][i][l] = extract(r, true, br);
                Bhol[r][i][l] = extract(r, false, br);
            }
        }

    // Z_i applied to a field
    auto z_apply = [&](int i, bool bar, const Field& f) {
        Field r(g, 0.0);
        for (int c = 0; c < 4; ++c) {
            if (!g.active[c]) continue;
            Field d = partial_spectral(f, g, c);
            for (std::size_t q = 0; q < g.size(); ++q) {
                cplx e = 0;
                for (int a = 0; a < 4; ++a) e += Z[i][a][q] * M.frame_coef[a][c][q];
                if (bar) e = std::conj(e);
                r[q] += e * d[q];
            }
        }
        return r;
    };

    ChernConnection out;
    // solve sum_k Gamma^k_ij h_{k lbar} = Z_i(h_{j lbar}) - sum_r h_{j rbar} Bbar[r][i][l]
    std::array<std::array<std::array<Field, 2>, 2>, 2> rhs;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l) {
                rhs[i][j][l] = z_apply(i, false, h[j][l]);
                for (int r = 0; r < 2; ++r)
                    for (std::size_t q = 0; q < g.size(); ++q)
                        rhs[i][j][l][q] -= h[j][r][q] * Bbar[r][i][l][q];
            }
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.gamma[k][i][j] = Field(g, 0.0);
    for (std::size_t q = 0; q < g.size(); ++q) {
        cplx H[4] = {h[0][0][q], h[1][0][q], h[0][1][q], h[1][1][q]};
        // 2x2 solve for each (i,j): [h_{0 lbar}, h_{1 lbar}] row per l
        cplx det = H[0] * H[3] - H[1] * H[2];
        if (std::abs(det) < 1e-14) throw numerical_error("chern: singular Hermitian metric");
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                cplx r0 = rhs[i][j][0][q], r1 = rhs[i][j][1][q];
                // rows: sum_k G^k h_{k 0bar} = r0; sum_k G^k h_{k 1bar} = r1
                cplx g0 = (r0 * H[3] - r1 * H[2]) / det;
                cplx g1 = (H[0] * r1 - H[1] * r0) / det;
                out.gamma[0][i][j][q] = g0;
                out.gamma[1][i][j][q] = g1;
            }
    }

    // full metric-compatibility residual, including the (0,1) directions:
    //   Zbar_j(h_{i lbar}) = sum_k Gamma^k_{jbar i} h_{k lbar}
    //                      + sum_k conj(Gamma^k_{j l}) h_{i kbar},
    // with Gamma^k_{jbar i} = -Bhol-mixed coefficient of the bracket.
    double worst = 0;
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
            for (int l = 0; l < 2; ++l) {
                Field lhs = z_apply(j, true, h[i][l]);
                for (std::size_t q = 0; q < g.size(); ++q) {
                    // [Z_i, Zbar_j] = ... ; Gamma^k_{jbar i} = -coeff of Z_k in [Z_i, Zbar_j]
                    cplx acc = 0;
                    for (int k = 0; k < 2; ++k) {
                        acc += -Bhol[k][i][j][q] * h[k][l][q];
                        acc += std::conj(out.gamma[k][j][l][q]) * h[i][k][q];
                    }
                    worst = std::max(worst, std::abs(lhs[q] - acc));
                }
            }
    out.metric_residual = worst;
    return out;
}

inline ChernConnection chern_gamma(const Manifold& M, const StructureCoefficients& S) {
    return chern_connection(M, S, M.U);
}

}  // namespace ac4
