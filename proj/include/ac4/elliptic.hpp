#pragma once
// The operator constructions on a tamed almost complex 4-manifold: the
// anti-invariant elliptic operator P = Pi_- d d*, the two correction solves
// sigma^1 (anti-invariant) and sigma^2 (self-dual), the first-order
// operators W and W~ with their adjoints, and the induced second-order
// (1,1)-valued operator D~ f = d W~ f.
//
//   W f  = J df + d* sigma1,        with  d^-_J W f  -> 0,
//   W~ f = d*(f omega + sigma1 + sigma2),  so d* W~ f = 0 identically and
//          sigma2 enforces d^+(W f) = d^+ d*(f omega + sigma1 + sigma2),
//          which kills d^-_J W~ f and matches the F-trace of d W f.
//   D~ f = d W~ f: a d-exact real (1,1)-form; equals 2i del delbar f on
//          integrable compatible members.

#include "ac4/basis.hpp"
#include "ac4/solvers.hpp"

namespace ac4 {

struct EllipticConfig {
    double tol = 1e-10;
    int max_iter = 4000;
    std::string preconditioner = "inv_laplacian";  // "none" | "inv_laplacian"
    bool deflate = true;

    void validate() const {
        if (!(tol > 0) || tol > 1e-4)
            throw config_error("elliptic tolerance must lie in (0, 1e-4]");
        if (max_iter < 1) throw config_error("max_iter must be positive");
        if (preconditioner != "none" && preconditioner != "inv_laplacian")
            throw config_error("unknown preconditioner id: " + preconditioner);
    }
    SolveOptions solve_options() const { return {tol, max_iter, preconditioner != "none", deflate}; }
};

inline Form project_anti_invariant(const Manifold& M, const Form& a) {
    return anti_invariant_part(M, a);
}
inline Form project_self_dual(const Manifold& M, const Form& a) {
    return split_pm(M, a).first;
}

/// Lejmi operator psi -> Pi_-( d d* psi ) on the anti-invariant sector.
inline Form lejmi_apply(const Manifold& M, const Form& psi) {
    Form s = project_anti_invariant(M, psi);
    return project_anti_invariant(M, exterior_d(M, codifferential(M, s)));
}

// ---------------------------------------------------------------------------
// harmonic / kernel bases (deflation data)

/// Discrete harmonic 1-forms: closed constant coframe directions corrected
/// to coclosedness by a scalar solve (exact up to the solver tolerance).
inline std::vector<Form> harmonic_one_forms(const Manifold& M,
                                            const EllipticConfig& cfg = EllipticConfig()) {
    std::vector<Form> out;
    SolveOptions opt = cfg.solve_options();
    auto laplace0 = [&](const Form& u) {
        return codifferential(M, exterior_d(M, u));
    };
    auto precond = [&](const Form& u) { return spectral_laplacian_power(M, u, -1.0); };
    auto mz = [&](Form u) {
        u.c[0] = mean_zero(M, u.c[0]);
        return u;
    };
    for (int a = 0; a < 4; ++a) {
        Form h(M.grid, 1);
        for (auto& x : h.c[a].v) x = 1.0;
        if (max_abs(exterior_d(M, h)) > 1e-13) continue;  // gamma-type direction
        Form dsh = codifferential(M, h);
        if (max_abs(dsh) > 1e-13) {
            SolveStats st;
            Form psi = cg_solve(M, laplace0, dsh, mz,
                                cfg.preconditioner == "none" ? FormOp() : precond, opt, st);
            if (!st.converged) throw numerical_error("harmonic_one_forms: correction diverged");
            h -= exterior_d(M, psi);
        }
        out.push_back(h);
    }
    orthonormalize(M, out);
    return out;
}

/// Discrete self-dual harmonic forms of the constant-structure members
/// (closed constant self-dual forms); empty when the structure varies.
inline std::vector<Form> selfdual_harmonic_forms(const Manifold& M) {
    std::vector<Form> out;
    // candidates: the pointwise self-dual constants e01+e23, e02+e31, e03+e12
    const int pairs[3][2][2] = {{{0, 1}, {2, 3}}, {{0, 2}, {3, 1}}, {{0, 3}, {1, 2}}};
    for (auto& pr : pairs) {
        Form h(M.grid, 2);
        for (int t = 0; t < 2; ++t) {
            int a = pr[t][0], b = pr[t][1];
            int sgn;
            int lab[2] = {a, b};
            int k = component_of(2, lab, sgn);
            for (auto& x : h.c[k].v) x += double(sgn);
        }
        Form hp = project_self_dual(M, h);
        if (max_abs(hp - h) > 1e-12) continue;  // not pointwise self-dual here
        if (max_abs(exterior_d(M, h)) > 1e-12) continue;
        if (max_abs(codifferential(M, h)) > 1e-12) continue;
        out.push_back(h);
    }
    orthonormalize(M, out);
    return out;
}

/// Kernel of the Lejmi operator on the band-limited anti-invariant sector:
/// dense assembly, generalized eigensolve, eigenvectors below gap_tol of
/// the largest eigenvalue.  Also reports the spectrum.
struct LejmiKernel {
    std::vector<Form> basis;
    Vec spectrum;          // ascending eigenvalues of the truncated operator
    double gram_residual;  // orthonormality certificate
};

inline LejmiKernel lejmi_kernel(const Manifold& M, int n_modes, double gap_tol = 1e-8) {
    // anti-invariant pointwise patterns: Re / Im of theta^1 ^ theta^2
    Form t12 = coframe_wedge(M, 0, false, 1, false);
    Form xire = real_part(t12 + conjugate(t12));
    Form tmp = cplx(0, 1) * (t12 - conjugate(t12));
    Form xiim = real_part(tmp);
    auto scalars = real_trig_fields(M.grid, n_modes, true);
    std::vector<Form> basis;
    for (const auto& s : scalars) {
        basis.push_back(scalar_times(s, xire));
        basis.push_back(scalar_times(s, xiim));
    }
    LejmiKernel out;
    out.gram_residual = orthonormalize(M, basis, nullptr, 1e-10);
    int n = int(basis.size());
    Mat A(n, n);
    std::vector<Form> images(n);
    for (int i = 0; i < n; ++i) images[i] = lejmi_apply(M, basis[i]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = l2_inner(M, images[i], basis[j]).real();
    Mat As = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(As);
    out.spectrum = es.eigenvalues();
    double lam_max = std::max(1e-300, es.eigenvalues().maxCoeff());
    for (int m = 0; m < n; ++m) {
        if (es.eigenvalues()(m) > gap_tol * lam_max) continue;
        Form f(M.grid, 2);
        for (int i = 0; i < n; ++i) {
            cplx w = es.eigenvectors()(i, m);
            for (int k = 0; k < 6; ++k) {
                Field t = basis[i].c[k];
                t *= w;
                f.c[k] += t;
            }
        }
        out.basis.push_back(std::move(f));
    }
    return out;
}

// ---------------------------------------------------------------------------
// sigma solves

struct SigmaSolve {
    Form sigma;
    SolveStats stats;
    double rhs_norm = 0;
    double kernel_defect = 0;  // |<rhs, kernel>| / |rhs| against the supplied basis
};

namespace detail {

inline FormOp sector_projector(const Manifold& M, bool anti_invariant,
                               const std::vector<Form>* defl, bool use_defl) {
    return [&M, anti_invariant, defl, use_defl](const Form& a) {
        Form r = anti_invariant ? project_anti_invariant(M, a) : project_self_dual(M, a);
        if (use_defl && defl && !defl->empty()) r = deflate(M, *defl, r);
        return r;
    };
}

inline SigmaSolve sector_poisson_solve(const Manifold& M, const Form& rhs, bool anti_invariant,
                                       const EllipticConfig& cfg, const std::vector<Form>* defl,
                                       const Form* warm_start) {
    cfg.validate();
    SolveOptions opt = cfg.solve_options();
    auto proj = detail::sector_projector(M, anti_invariant, defl, cfg.deflate);
    auto op = [&](const Form& s) {
        return proj(exterior_d(M, codifferential(M, proj(s))));
    };
    FormOp precond;
    if (cfg.preconditioner != "none")
        precond = [&](const Form& s) { return spectral_laplacian_power(M, s, -1.0); };
    SigmaSolve out;
    out.rhs_norm = l2_norm(M, rhs);
    if (defl && !defl->empty()) {
        double rn = l2_norm(M, rhs);
        if (rn > 0) {
            double worst = 0;
            for (const auto& k : *defl) worst = std::max(worst, std::abs(l2_inner(M, rhs, k)));
            out.kernel_defect = worst / rn;
        }
    }
    Form b = rhs;
    if (warm_start) {
        // residual-correction solve keeps the warm start's kernel component,
        // which never reaches d* sigma
        Form r0 = b - op(*warm_start);
        Form dx = cg_solve(M, op, r0, proj, precond, opt, out.stats);
        out.sigma = *warm_start + dx;
    } else {
        out.sigma = cg_solve(M, op, b, proj, precond, opt, out.stats);
    }
    return out;
}

}  // namespace detail

/// sigma^1: anti-invariant solve of  Pi_-(d d* sigma) = -Pi_-(d J df).
inline SigmaSolve solve_sigma1(const Manifold& M, const Field& f, const EllipticConfig& cfg,
                               const std::vector<Form>* kernel = nullptr,
                               const Form* warm = nullptr) {
    Form df = d_scalar(M, f);
    Form rhs = anti_invariant_part(M, exterior_d(M, j_act(M, df)));
    rhs *= -1.0;
    return detail::sector_poisson_solve(M, rhs, true, cfg, kernel, warm);
}

/// sigma^2: self-dual solve of  Pi_+(d d* sigma) = d^+(W f - d*(f omega + sigma1)).
inline SigmaSolve solve_sigma2(const Manifold& M, const Field& f, const Form& sigma1,
                               const Form& Wf, const EllipticConfig& cfg,
                               const std::vector<Form>* harm = nullptr,
                               const Form* warm = nullptr) {
    Form m = scalar_times(f, taming_form(M));
    m += sigma1;
    Form rhs = d_plus(M, Wf - codifferential(M, m));
    return detail::sector_poisson_solve(M, rhs, false, cfg, harm, warm);
}

// ---------------------------------------------------------------------------
// W, W~, D~ and diagnostics

struct WBundle {
    Field f;
    Form sigma1, sigma2;
    Form W, Wtilde, Dtilde;
    std::map<std::string, double> diag;
};

/// Reusable state for repeated applications (warm starts); safe because
/// kernel drift in the sigmas never enters d* sigma.
struct WtildeWorkspace {
    Form sigma1, sigma2;
    bool valid = false;
};

inline Form w_apply(const Manifold& M, const Field& f, const EllipticConfig& cfg,
                    const std::vector<Form>* kernel = nullptr, WtildeWorkspace* ws = nullptr,
                    Form* sigma1_out = nullptr) {
    auto s1 = solve_sigma1(M, f, cfg, kernel, (ws && ws->valid) ? &ws->sigma1 : nullptr);
    double ref1 =
        std::max(1e-300, l2_norm(M, exterior_d(M, j_act(M, d_scalar(M, f)))) + s1.rhs_norm);
    if (!s1.stats.converged && s1.stats.rel_residual * s1.rhs_norm > 100 * cfg.tol * ref1)
        throw numerical_error("sigma1 solve stalled at " + std::to_string(s1.stats.rel_residual));
    if (ws) ws->sigma1 = s1.sigma;
    if (sigma1_out) *sigma1_out = s1.sigma;
    Form df = d_scalar(M, f);
    Form W = j_act(M, df);
    W += codifferential(M, s1.sigma);
    return W;
}

/// W~ f = d*(f omega + sigma1 + sigma2).
inline Form w_tilde_apply(const Manifold& M, const Field& f, const EllipticConfig& cfg,
                          const std::vector<Form>* kernel = nullptr,
                          const std::vector<Form>* harm = nullptr, WtildeWorkspace* ws = nullptr) {
    Form sigma1;
    Form W = w_apply(M, f, cfg, kernel, ws, &sigma1);
    auto s2 = solve_sigma2(M, f, sigma1, W, cfg, harm, (ws && ws->valid) ? &ws->sigma2 : nullptr);
    double ref2 = std::max(1e-300, l2_norm(M, exterior_d(M, W)) + s2.rhs_norm);
    if (!s2.stats.converged && s2.stats.rel_residual * s2.rhs_norm > 100 * cfg.tol * ref2)
        throw numerical_error("sigma2 solve stalled at " + std::to_string(s2.stats.rel_residual));
    if (ws) {
        ws->sigma2 = s2.sigma;
        ws->valid = true;
    }
    Form m = scalar_times(f, taming_form(M));
    m += sigma1;
    m += s2.sigma;
    return codifferential(M, m);
}

/// Exact discrete adjoint of f -> W~ f on mean-zero scalars, assembled from
/// the self-adjointness of the two sector solves:
///   W~* y = <omega, dy> + d* J d* P+(d^-_J y)  +  L2^т Q+(d^+ y),
/// where P+ and Q+ are the sector Poisson pseudo-solves and L2 is the chain
/// d^+ * (d(.) ^ omega^-).
inline Field w_tilde_adjoint_apply(const Manifold& M, const Form& y, const EllipticConfig& cfg,
                                   const std::vector<Form>* kernel = nullptr,
                                   const std::vector<Form>* harm = nullptr,
                                   WtildeWorkspace* ws = nullptr) {
    Form dy = exterior_d(M, y);
    // term 1: pointwise pairing with omega
    Field t1 = pointwise_inner(M, dy, taming_form(M));

    // term 2: adjoint of d* sigma1(f)
    Form dmy = anti_invariant_part(M, dy);
    auto p1 = detail::sector_poisson_solve(M, dmy, true, cfg, kernel,
                                           (ws && ws->valid) ? &ws->sigma1 : nullptr);
    if (ws) ws->sigma1 = p1.sigma;
    Field t2 = codifferential(M, j_act(M, codifferential(M, p1.sigma))).c[0];

    // term 3: adjoint of d* sigma2(f) via the direct chain L2 f = d^+ *(df ^ omega^-)
    Form dpy = project_self_dual(M, dy);
    auto p2 = detail::sector_poisson_solve(M, dpy, false, cfg, harm,
                                           (ws && ws->valid) ? &ws->sigma2 : nullptr);
    if (ws) {
        ws->sigma2 = p2.sigma;
        ws->valid = true;
    }
    // L2* X = d* V* ( -*( d* Pi_+ X ) )
    Form w1 = codifferential(M, project_self_dual(M, p2.sigma));
    Form w3 = hodge_star(M, w1);
    w3 *= -1.0;
    // V* : 3-forms -> 1-forms, pointwise adjoint of wedging with omega^-
    Form v(M.grid, 1);
    {
        const Form om = anti_invariant_part_of_omega(M);
        for (std::size_t q = 0; q < M.npoints(); ++q) {
            // build V (4x4: 1-form comps -> 3-form comps) and apply gmat V^T gram3
            double V[16] = {0};
            for (int i1 = 0; i1 < 4; ++i1)
                for (int m = 0; m < 6; ++m) {
                    int sgn;
                    int K = wedge_component(1, i1, 2, m, sgn);
                    if (sgn == 0) continue;
                    V[K * 4 + i1] += double(sgn) * om.c[m][q].real();
                }
            cplx tmp[4], tmp2[4];
            for (int K = 0; K < 4; ++K) {
                cplx acc = 0;
                for (int L = 0; L < 4; ++L) acc += M.gram3[K * 4 + L][q] * w3.c[L][q];
                tmp[K] = acc;
            }
            for (int i1 = 0; i1 < 4; ++i1) {
                cplx acc = 0;
                for (int K = 0; K < 4; ++K) acc += V[K * 4 + i1] * tmp[K];
                tmp2[i1] = acc;
            }
            for (int i1 = 0; i1 < 4; ++i1) {
                cplx acc = 0;
                for (int b = 0; b < 4; ++b) acc += M.gmat[i1 * 4 + b][q] * tmp2[b];
                v.c[i1][q] = acc;
            }
        }
    }
    Field t3 = codifferential(M, v).c[0];

    Field out = t1;
    out += t2;
    out += t3;
    return mean_zero(M, out);
}

/// Full bundle with the contract diagnostics of the construction.
inline WBundle build_w_bundle(const Manifold& M, const Field& f_in, const EllipticConfig& cfg,
                              const std::vector<Form>* kernel = nullptr,
                              const std::vector<Form>* harm = nullptr) {
    WBundle B;
    B.f = mean_zero(M, f_in);
    B.diag["mean_zero_shift"] = max_abs(B.f - f_in);

    auto s1 = solve_sigma1(M, B.f, cfg, kernel);
    B.sigma1 = s1.sigma;
    B.diag["sigma1_rel_residual"] = s1.stats.rel_residual;
    B.diag["sigma1_iterations"] = double(s1.stats.iterations);
    B.diag["sigma1_kernel_defect"] = s1.kernel_defect;
    B.diag["sigma1_norm"] = l2_norm(M, B.sigma1);

    Form df = d_scalar(M, B.f);
    B.W = j_act(M, df);
    B.W += codifferential(M, B.sigma1);

    auto s2 = solve_sigma2(M, B.f, B.sigma1, B.W, cfg, harm);
    B.sigma2 = s2.sigma;
    B.diag["sigma2_rel_residual"] = s2.stats.rel_residual;
    B.diag["sigma2_iterations"] = double(s2.stats.iterations);
    B.diag["sigma2_kernel_defect"] = s2.kernel_defect;
    B.diag["sigma2_norm"] = l2_norm(M, B.sigma2);

    Form m = scalar_times(B.f, taming_form(M));
    m += B.sigma1;
    m += B.sigma2;
    B.Wtilde = codifferential(M, m);
    B.Dtilde = exterior_d(M, B.Wtilde);

    double dW_scale = std::max(1e-300, l2_norm(M, exterior_d(M, B.W)));
    double dWt_scale = std::max(1e-300, l2_norm(M, B.Dtilde) + l2_norm(M, B.Wtilde));
    B.diag["dminusj_W_rel"] = l2_norm(M, d_minus_j(M, B.W)) / dW_scale;
    B.diag["dstar_Wtilde_rel"] = l2_norm(M, codifferential(M, B.Wtilde)) / dWt_scale;
    B.diag["dminusj_Wtilde_rel"] = l2_norm(M, d_minus_j(M, B.Wtilde)) / dWt_scale;
    // D~ f must be a real (1,1)-form and d-exact (it is d of something by
    // construction; J-invariance up to the solve tolerance)
    B.diag["dtilde_anti_invariant_rel"] =
        l2_norm(M, anti_invariant_part(M, B.Dtilde)) / std::max(1e-300, l2_norm(M, B.Dtilde));

    // the two-line system certifying the build (second line with sigma2)
    Form r1 = anti_invariant_part(M, exterior_d(M, j_act(M, df)));
    r1 += anti_invariant_part(M, exterior_d(M, codifferential(M, B.sigma1)));
    B.diag["system_residual_1"] = l2_norm(M, r1) / dW_scale;
    Form omm = anti_invariant_part_of_omega(M);
    Form r2 = anti_invariant_part(
        M, exterior_d(M, hodge_star(M, wedge(M.grid, df, omm)) - codifferential(M, B.sigma2)));
    B.diag["system_residual_2"] = l2_norm(M, r2) / dWt_scale;

    // exactness pairing <D~f, F> = integral of W~f ^ dF
    cplx lhs = l2_inner(M, B.Dtilde, fundamental_form(M));
    Form dF = exterior_d(M, fundamental_form(M));
    cplx rhs = integrate(wedge(M.grid, B.Wtilde, dF).c[0], M.grid);
    B.diag["exactness_pairing"] = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
    return B;
}

// ---------------------------------------------------------------------------
// closed-form adjoints on admissible inputs

struct AdjointResult {
    Field value;
    double dstar_rel = 0;    // admissibility residuals of the input
    double dminusj_rel = 0;
};

/// W~* a = Lambda_F(d^+_J a) for a with d* a = 0 = d^-_J a.  The overall
/// sign is fixed by the L2 adjoint identity <W~ f, a> = <f, W~* a>.
inline AdjointResult adjoint_w_tilde(const Manifold& M, const Form& a) {
    AdjointResult r;
    double scale = std::max(1e-300, l2_norm(M, exterior_d(M, a)) + l2_norm(M, a));
    r.dstar_rel = l2_norm(M, codifferential(M, a)) / scale;
    r.dminusj_rel = l2_norm(M, d_minus_j(M, a)) / scale;
    r.value = lambda_contract(M, d_plus_j(M, a));
    return r;
}

/// W* a = Lambda_F(d^+_J a) - *(a ^ dF) for a with d^-_J a = 0.
inline AdjointResult adjoint_w(const Manifold& M, const Form& a) {
    AdjointResult r;
    double scale = std::max(1e-300, l2_norm(M, exterior_d(M, a)) + l2_norm(M, a));
    r.dminusj_rel = l2_norm(M, d_minus_j(M, a)) / scale;
    r.value = lambda_contract(M, d_plus_j(M, a));
    Form dF = exterior_d(M, fundamental_form(M));
    Field corr = hodge_star(M, wedge(M.grid, a, dF)).c[0];
    for (std::size_t q = 0; q < M.npoints(); ++q) r.value[q] -= corr[q];
    return r;
}

}  // namespace ac4
