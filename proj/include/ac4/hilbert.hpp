#pragma once
// Finite-dimensional Hilbert-complex machinery: truncated Fourier-Galerkin
// bases, operator matrices, best estimate constants for |h| <= C(|T* h| +
// |S h|), minimal-norm solves with the bound check, the first-order
// regularity constant of d+ (+) d*, spectral-gap diagnostics, and the full
// exactness pipeline that reconstructs a potential f with d W~ f = da.

#include <chrono>

#include "ac4/elliptic.hpp"

namespace ac4 {

// ---------------------------------------------------------------------------
// generic truncated operator assembly

struct AssembledOperator {
    std::vector<Form> domain;  // L2_g-orthonormal basis fields
    Mat image_gram;            // <Op b_i, Op b_j>
    double gram_residual = 0;
    std::vector<double> singular_values;  // sqrt of image_gram eigenvalues, ascending
};

namespace detail {

inline FormOp mean_zero_projector(const Manifold& M) {
    return [&M](Form u) {
        u.c[0] = mean_zero(M, u.c[0]);
        return u;
    };
}

}  // namespace detail

/// Assembles the operator named by `id` on the band-K sector and returns
/// the singular data of the truncation.
///   d_functions : d on mean-zero scalars
///   dplusj      : d^+_J on 1-forms
///   dminusj     : d^-_J on 1-forms
///   wtilde      : W~ on mean-zero scalars (elliptic solves per column)
///   zero        : the zero operator on scalars (diagnostic)
inline AssembledOperator assemble_operator(const Manifold& M, const std::string& id, int K,
                                           const EllipticConfig& cfg = EllipticConfig()) {
    AssembledOperator out;
    FormOp op;
    WtildeWorkspace ws;
    if (id == "d_functions" || id == "wtilde" || id == "zero") {
        out.domain = sector_raw_basis(M, 0, scalar_pattern(), K, false);
        out.gram_residual = orthonormalize(M, out.domain, detail::mean_zero_projector(M));
    } else if (id == "dplusj" || id == "dminusj") {
        out.domain = sector_raw_basis(M, 1, one_form_patterns(), K, true);
        out.gram_residual = orthonormalize(M, out.domain);
    } else {
        throw config_error("assemble_operator: unknown id " + id);
    }
    if (id == "d_functions")
        op = [&M](const Form& u) { return exterior_d(M, u); };
    else if (id == "dplusj")
        op = [&M](const Form& u) { return d_plus_j(M, u); };
    else if (id == "dminusj")
        op = [&M](const Form& u) { return d_minus_j(M, u); };
    else if (id == "zero")
        op = [&M](const Form& u) { return Form(M.grid, 1); };
    else
        op = [&M, &cfg, &ws](const Form& u) {
            return w_tilde_apply(M, u.c[0], cfg, nullptr, nullptr, &ws);
        };

    int n = int(out.domain.size());
    std::vector<Form> images;
    images.reserve(n);
    for (int i = 0; i < n; ++i) images.push_back(op(out.domain[i]));
    out.image_gram = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = l2_inner(M, images[i], images[j]).real();
            out.image_gram(i, j) = v;
            out.image_gram(j, i) = v;
        }
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(out.image_gram);
        out.singular_values.resize(n);
        for (int i = 0; i < n; ++i)
            out.singular_values[std::size_t(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    }
    return out;
}

struct GapReport {
    std::vector<int> cutoffs;
    std::vector<double> gaps;  // smallest singular value above the zero cluster
    std::vector<int> kernel_dims;
    bool collapse_flag = false;  // gap shrinking toward zero under refinement
};

/// Smallest nonzero singular value of the truncated operator per cutoff; a
/// closed-range diagnostic, not a proof.
inline GapReport spectral_gap_report(const Manifold& M, const std::string& id,
                                     const std::vector<int>& cutoffs,
                                     const EllipticConfig& cfg = EllipticConfig()) {
    if (cutoffs.size() < 2) throw config_error("spectral_gap_report needs at least 2 cutoffs");
    GapReport rep;
    for (int K : cutoffs) {
        auto A = assemble_operator(M, id, K, cfg);
        double smax = A.singular_values.empty() ? 0.0 : A.singular_values.back();
        double gap = 0.0;
        int zero_dim = 0;
        for (double s : A.singular_values) {
            if (s > 1e-7 * std::max(smax, 1.0)) {
                gap = s;
                break;
            }
            ++zero_dim;
        }
        rep.cutoffs.push_back(K);
        rep.gaps.push_back(gap);
        rep.kernel_dims.push_back(zero_dim);
    }
    for (std::size_t i = 1; i < rep.gaps.size(); ++i)
        if (rep.gaps[i] < 0.2 * rep.gaps[0]) rep.collapse_flag = true;
    return rep;
}

// ---------------------------------------------------------------------------
// the (T, S) complex of the exactness argument

struct TruncatedComplex {
    int cutoff = 0;
    std::vector<Form> H1;  // mean-zero scalars
    std::vector<Form> V;   // truncated im(d*): coexact 1-forms
    std::vector<Form> H3;  // orthonormalized span of the S-images
    Mat T;                 // dim V x dim H1, T = Proj_V W~
    Mat S;                 // dim H3 x dim V
    Mat d_gram;            // <d v_i, d v_j>, for sigma_min(d|V)
    double gram_residual = 0;
    double t_defect = 0;   // max_m |W~ phi_m - Proj_V W~ phi_m| / |W~ phi_m|
    double st_norm = 0;    // |S T|_2
    double sigma_min_d = 0;
};

inline TruncatedComplex build_whw_complex(const Manifold& M, int K, const EllipticConfig& cfg,
                                          const std::vector<Form>* kernel = nullptr,
                                          const std::vector<Form>* harm = nullptr) {
    TruncatedComplex cx;
    cx.cutoff = K;
    cx.H1 = sector_raw_basis(M, 0, scalar_pattern(), K, false);
    cx.gram_residual = orthonormalize(M, cx.H1, detail::mean_zero_projector(M));

    // V = orthonormalized image of the band-K 2-form sector under d*
    {
        auto two = sector_raw_basis(M, 2, two_form_patterns(), K, true);
        cx.V.reserve(two.size());
        for (auto& b : two) cx.V.push_back(codifferential(M, b));
        double g = orthonormalize(M, cx.V, nullptr, 1e-8);
        cx.gram_residual = std::max(cx.gram_residual, g);
    }

    int nv = int(cx.V.size()), n1 = int(cx.H1.size());
    // S: d^-_J on V, expressed on the orthonormalized image span
    std::vector<Form> simg;
    simg.reserve(nv);
    for (const auto& v : cx.V) simg.push_back(d_minus_j(M, v));
    cx.H3 = simg;
    orthonormalize(M, cx.H3, nullptr, 1e-12);
    int n3 = int(cx.H3.size());
    cx.S = Mat::Zero(n3, nv);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < n3; ++i) cx.S(i, j) = l2_inner(M, simg[std::size_t(j)], cx.H3[std::size_t(i)]).real();

    // T: W~ on H1 projected to V
    cx.T = Mat::Zero(nv, n1);
    WtildeWorkspace ws;
    for (int m = 0; m < n1; ++m) {
        Form w = w_tilde_apply(M, cx.H1[std::size_t(m)].c[0], cfg, kernel, harm, &ws);
        double wn = l2_norm(M, w);
        double captured = 0;
        for (int i = 0; i < nv; ++i) {
            double c = l2_inner(M, w, cx.V[std::size_t(i)]).real();
            cx.T(i, m) = c;
            captured += c * c;
        }
        if (wn > 0) {
            double defect2 = std::max(0.0, wn * wn - captured);
            cx.t_defect = std::max(cx.t_defect, std::sqrt(defect2) / wn);
        }
    }
    cx.st_norm = (cx.S * cx.T).norm();

    cx.d_gram = Mat::Zero(nv, nv);
    std::vector<Form> dimg;
    dimg.reserve(nv);
    for (const auto& v : cx.V) dimg.push_back(exterior_d(M, v));
    for (int i = 0; i < nv; ++i)
        for (int j = i; j < nv; ++j) {
            double val = l2_inner(M, dimg[std::size_t(i)], dimg[std::size_t(j)]).real();
            cx.d_gram(i, j) = val;
            cx.d_gram(j, i) = val;
        }
    if (nv > 0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(cx.d_gram);
        cx.sigma_min_d = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    }
    return cx;
}

// ---------------------------------------------------------------------------
// estimate constants

struct EstimateReport {
    double constant = 0;      // quadratic-form variant C = 1/sqrt(lambda_min)
    double bracket_lo = 0;    // sum-of-norms constant lies in [lo, hi]
    double bracket_hi = 0;
    double lambda_min = 0;
    Vec minimizer;            // coefficients in V of the minimizing h
    int cutoff = 0;
    std::map<std::string, double> defects;
};

/// Best constant with |h| <= C sqrt(|T* h|^2 + |S h|^2) on V, by a dense
/// eigen-decomposition of T T^t + S^t S.  The sum-of-norms constant is
/// bracketed by [C/sqrt(2), C].
inline EstimateReport best_constant(const Mat& T, const Mat& S, int cutoff = 0) {
    EstimateReport rep;
    rep.cutoff = cutoff;
    int nv = int(T.rows());
    if (nv == 0) throw numerical_error("best_constant: trivial V");
    Mat Q = T * T.transpose();
    if (S.size() > 0) Q += S.transpose() * S;
    Eigen::SelfAdjointEigenSolver<Mat> es(Q);
    rep.lambda_min = std::max(0.0, es.eigenvalues()(0));
    rep.constant = rep.lambda_min > 0 ? 1.0 / std::sqrt(rep.lambda_min) : 1e300;
    rep.bracket_lo = rep.constant / std::sqrt(2.0);
    rep.bracket_hi = rep.constant;
    rep.minimizer = es.eigenvectors().col(0);
    return rep;
}

inline EstimateReport best_constant(const TruncatedComplex& cx) {
    auto rep = best_constant(cx.T, cx.S, cx.cutoff);
    rep.defects["t_defect"] = cx.t_defect;
    rep.defects["st_norm"] = cx.st_norm;
    rep.defects["gram_residual"] = cx.gram_residual;
    return rep;
}

/// Appends extra V-directions (e.g. a harmonic 1-form) and recomputes the
/// constant; the degeneracy demonstration of the estimate.
inline EstimateReport best_constant_widened(const Manifold& M, const TruncatedComplex& cx,
                                            const std::vector<Form>& extra,
                                            const EllipticConfig& cfg,
                                            const std::vector<Form>* kernel = nullptr,
                                            const std::vector<Form>* harm = nullptr) {
    std::vector<Form> wide = cx.V;
    for (const auto& e : extra) wide.push_back(e);
    orthonormalize(M, wide, nullptr, 1e-10);
    int nv = int(wide.size()), n1 = int(cx.H1.size());
    Mat T = Mat::Zero(nv, n1);
    WtildeWorkspace ws;
    for (int m = 0; m < n1; ++m) {
        Form w = w_tilde_apply(M, cx.H1[std::size_t(m)].c[0], cfg, kernel, harm, &ws);
        for (int i = 0; i < nv; ++i) T(i, m) = l2_inner(M, w, wide[std::size_t(i)]).real();
    }
    std::vector<Form> simg;
    for (const auto& v : wide) simg.push_back(d_minus_j(M, v));
    std::vector<Form> h3 = simg;
    orthonormalize(M, h3, nullptr, 1e-12);
    Mat S = Mat::Zero(int(h3.size()), nv);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < int(h3.size()); ++i)
            S(i, j) = l2_inner(M, simg[std::size_t(j)], h3[std::size_t(i)]).real();
    return best_constant(T, S, cx.cutoff);
}

// ---------------------------------------------------------------------------
// minimal-norm matrix solve with the bound check

struct HormanderSolve {
    Vec w;
    double residual = 0;      // |T w - v| / |v|
    double s_violation = 0;   // |S v| / |v|
    double norm_ratio = 0;    // |w| / (C |v|)
    bool bound_ok = false;
    double kernel_orthogonality = 0;  // |P_ker(T) w|
};

/// Minimal-norm solution of T w = v on the truncated complex via a
/// complete orthogonal decomposition (the SVD oracle lives in the tests).
inline HormanderSolve hormander_solve(const Mat& T, const Mat& S, const Vec& v, double constant) {
    HormanderSolve out;
    double vn = v.norm();
    if (vn == 0) {
        out.w = Vec::Zero(T.cols());
        out.bound_ok = true;
        return out;
    }
    if (S.size() > 0) out.s_violation = (S * v).norm() / vn;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(T);
    out.w = cod.solve(v);
    out.residual = (T * out.w - v).norm() / vn;
    out.norm_ratio = out.w.norm() / (constant * vn);
    out.bound_ok = out.w.norm() <= constant * vn * (1 + 1e-9);
    // pseudoinverse solutions are orthogonal to ker(T)
    Eigen::JacobiSVD<Mat> svd(T, Eigen::ComputeFullV);
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) <= 1e-12 * std::max(smax, 1.0)) {
            out.kernel_orthogonality =
                std::max(out.kernel_orthogonality, std::abs(svd.matrixV().col(i).dot(out.w)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// first-order regularity constant of d+ (+) d*

/// Discrete constant C with |a|_{L2_1} <= C |(d+ (+) d*) a| on band-K
/// 1-forms orthogonal to the discrete harmonic space (where the harmonic
/// term of the estimate drops).  The L2_1 norm is L2 of the value plus all
/// frame first derivatives of the components.
inline EstimateReport ahs_constant(const Manifold& M, int K,
                                   const EllipticConfig& cfg = EllipticConfig()) {
    auto harm = harmonic_one_forms(M, cfg);
    auto basis = sector_raw_basis(M, 1, one_form_patterns(), K, true);
    FormOp proj = [&](Form a) { return deflate(M, harm, a); };
    double gr = orthonormalize(M, basis, proj);
    int n = int(basis.size());
    if (n == 0) throw numerical_error("ahs_constant: empty basis");
    Mat M1(n, n), M2(n, n);
    std::vector<Form> dplus_img(basis.size()), dstar_img(basis.size());
    std::vector<std::array<Form, 4>> deriv(basis.size());
    for (int i = 0; i < n; ++i) {
        dplus_img[std::size_t(i)] = d_plus(M, basis[std::size_t(i)]);
        dstar_img[std::size_t(i)] = codifferential(M, basis[std::size_t(i)]);
        for (int a = 0; a < 4; ++a) {
            Form da(M.grid, 1);
            for (int k = 0; k < 4; ++k) da.c[k] = frame_apply(M, a, basis[std::size_t(i)].c[k]);
            deriv[std::size_t(i)][a] = da;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v1 = l2_inner(M, basis[std::size_t(i)], basis[std::size_t(j)]).real();
            for (int a = 0; a < 4; ++a)
                v1 += l2_inner(M, deriv[std::size_t(i)][a], deriv[std::size_t(j)][a]).real();
            double v2 = l2_inner(M, dplus_img[std::size_t(i)], dplus_img[std::size_t(j)]).real() +
                        l2_inner(M, dstar_img[std::size_t(i)], dstar_img[std::size_t(j)]).real();
            M1(i, j) = M1(j, i) = v1;
            M2(i, j) = M2(j, i) = v2;
        }
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(M1, M2);
    EstimateReport rep;
    rep.cutoff = K;
    rep.lambda_min = es.eigenvalues().maxCoeff();  // C^2
    rep.constant = std::sqrt(std::max(0.0, rep.lambda_min));
    rep.bracket_lo = rep.constant;
    rep.bracket_hi = rep.constant;
    rep.minimizer = es.eigenvectors().col(n - 1);
    rep.defects["gram_residual"] = gr;
    return rep;
}

/// Fieldwise residual of d+ a = d^-_J a + (Lambda_F d^+_J a / 2) F.
inline double dplus_decomposition_check(const Manifold& M, const Form& a) {
    Form lhs = d_plus(M, a);
    Field tr = lambda_contract(M, d_plus_j(M, a));
    tr *= 0.5;
    Form rhs = d_minus_j(M, a) + scalar_times(tr, fundamental_form(M));
    return max_abs(lhs - rhs) / std::max(1e-300, max_abs(lhs));
}

// ---------------------------------------------------------------------------
// the exactness pipeline

struct SolveReport {
    std::array<int, 4> grid{};
    int cutoff = 0;
    std::map<std::string, double> constants, residuals, defects, timings;
    Field f;         // potential from the minimal-norm route
    Field f_direct;  // potential from the direct least-squares route
};

/// Random coexact band-limited 1-form with the anti-invariant part of its
/// differential projected out (the admissible test inputs of the pipeline).
inline Form pipeline_test_form(const Manifold& M, int K, std::mt19937_64& rng,
                               const EllipticConfig& cfg) {
    Form beta = random_form(M, 2, K, rng);
    Form a0 = codifferential(M, beta);
    // least squares: minimize |d^-_J (a0 + d* b)| over 2-forms b; the
    // correction d* b stays coexact, so the output is an admissible input
    auto Aop = [&](const Form& b) { return d_minus_j(M, codifferential(M, b)); };
    // adjoint of b -> Pi_- d d* b:  y -> d(d*(Pi_- y))
    auto Atop = [&](const Form& y) {
        return exterior_d(M, codifferential(M, anti_invariant_part(M, y)));
    };
    Form rhs = d_minus_j(M, a0);
    rhs *= -1.0;
    SolveOptions opt;
    opt.tol = cfg.tol * 10;
    opt.max_iter = 600;
    FormOp precond = [&](const Form& v) { return spectral_laplacian_power(M, v, -1.0); };
    auto res = cgls_solve(M, Aop, Atop, rhs, precond, nullptr, opt);
    return a0 + codifferential(M, res.x);
}

inline SolveReport theorem1_pipeline(const Manifold& M, const Form& a_in,
                                     const TruncatedComplex& cx, const EllipticConfig& cfg,
                                     const std::vector<Form>* kernel = nullptr,
                                     const std::vector<Form>* harm = nullptr) {
    using clock = std::chrono::steady_clock;
    auto tick = clock::now();
    auto lap = [&](const char* name, SolveReport& rep) {
        auto now = clock::now();
        rep.timings[name] = std::chrono::duration<double>(now - tick).count();
        tick = now;
    };
    SolveReport rep;
    rep.grid = M.grid.n;
    rep.cutoff = cx.cutoff;

    // Hodge reduction: replace a by its coexact part and check the
    // precondition d^-_J a ~ 0
    auto harm1 = harmonic_one_forms(M, cfg);
    Form a = a_in;
    {
        // remove the exact part: a -= d (Lap0^-1 d* a)
        Form dsa = codifferential(M, a);
        auto lap0 = [&](const Form& u) { return codifferential(M, exterior_d(M, u)); };
        FormOp mz = detail::mean_zero_projector(M);
        FormOp pre = [&](const Form& u) { return spectral_laplacian_power(M, u, -1.0); };
        SolveOptions opt = cfg.solve_options();
        SolveStats st;
        Form psi = cg_solve(M, lap0, dsa, mz, pre, opt, st);
        a -= exterior_d(M, psi);
        a = deflate(M, harm1, a);
        rep.defects["hodge_exact_residual"] = st.rel_residual;
    }
    double an = l2_norm(M, a);
    Form psi = exterior_d(M, a);
    double psin = l2_norm(M, psi);
    rep.residuals["dminusj_a_rel"] = l2_norm(M, d_minus_j(M, a)) / std::max(1e-300, psin);
    rep.residuals["dstar_a_rel"] = l2_norm(M, codifferential(M, a)) / std::max(1e-300, an);
    lap("setup", rep);

    // estimate constant on the truncated complex
    auto est = best_constant(cx);
    rep.constants["estimate_constant"] = est.constant;
    rep.constants["estimate_bracket_lo"] = est.bracket_lo;
    rep.constants["sigma_min_d"] = cx.sigma_min_d;
    rep.constants["bound_constant_da"] = est.constant / std::max(1e-300, cx.sigma_min_d);
    rep.defects["t_defect"] = cx.t_defect;
    rep.defects["st_norm"] = cx.st_norm;
    rep.defects["gram_residual"] = cx.gram_residual;
    lap("estimate", rep);

    // matrix-level certificate: minimal-norm solve of T w = Proj_V a
    {
        Vec vc = project_coefficients(M, cx.V, a);
        double captured = vc.norm();
        rep.defects["a_outside_V"] = std::sqrt(std::max(0.0, an * an - captured * captured)) /
                                     std::max(1e-300, an);
        auto hs = hormander_solve(cx.T, cx.S, vc, est.constant);
        rep.residuals["matrix_route_residual"] = hs.residual;
        rep.residuals["matrix_bound_ratio"] = hs.norm_ratio;
        rep.defects["matrix_s_violation"] = hs.s_violation;
    }
    lap("matrix_route", rep);

    // route 1: full-grid minimal-norm solve of W~ f = a
    WtildeWorkspace ws_f, ws_a;
    auto Wt = [&](const Form& u) {
        return w_tilde_apply(M, u.c[0], cfg, kernel, harm, &ws_f);
    };
    auto Wt_adj = [&](const Form& y) {
        Form r(M.grid, 0);
        r.c[0] = w_tilde_adjoint_apply(M, y, cfg, kernel, harm, &ws_a);
        return r;
    };
    FormOp mz = detail::mean_zero_projector(M);
    FormOp pre_half = [&](const Form& v) { return spectral_laplacian_power(M, v, -0.5); };
    SolveOptions opt = cfg.solve_options();
    opt.tol = std::max(cfg.tol, 1e-9);
    opt.max_iter = 220;
    auto r1 = cgls_solve(M, Wt, Wt_adj, a, pre_half, mz, opt);
    rep.f = r1.x.c[0];
    rep.residuals["wtilde_route_residual"] = r1.rel_residual;
    rep.residuals["wtilde_route_iterations"] = double(r1.iterations);
    lap("hormander_route", rep);

    // route 2: direct least squares on D~
    auto Dt = [&](const Form& u) {
        return exterior_d(M, w_tilde_apply(M, u.c[0], cfg, kernel, harm, &ws_f));
    };
    auto Dt_adj = [&](const Form& y) {
        Form r(M.grid, 0);
        r.c[0] = w_tilde_adjoint_apply(M, codifferential(M, y), cfg, kernel, harm, &ws_a);
        return r;
    };
    FormOp pre_full = [&](const Form& v) { return spectral_laplacian_power(M, v, -1.0); };
    auto r2 = cgls_solve(M, Dt, Dt_adj, psi, pre_full, mz, opt);
    rep.f_direct = r2.x.c[0];
    rep.residuals["direct_route_lsq_residual"] = r2.rel_residual;
    lap("direct_route", rep);

    // certify both routes against psi = da and compare their images
    Form D1 = exterior_d(M, w_tilde_apply(M, rep.f, cfg, kernel, harm, &ws_f));
    Form D2 = exterior_d(M, w_tilde_apply(M, rep.f_direct, cfg, kernel, harm, &ws_f));
    rep.residuals["dtilde_f_minus_da_rel"] = l2_norm(M, D1 - psi) / std::max(1e-300, psin);
    rep.residuals["dtilde_fdirect_minus_da_rel"] = l2_norm(M, D2 - psi) / std::max(1e-300, psin);
    rep.residuals["route_image_match_rel"] = l2_norm(M, D1 - D2) / std::max(1e-300, psin);
    double fn = l2_norm(M, rep.f);
    rep.constants["f_norm"] = fn;
    rep.constants["a_norm"] = an;
    rep.constants["da_norm"] = psin;
    rep.residuals["bound_f_le_C_a"] = fn / std::max(1e-300, est.constant * an);
    rep.residuals["bound_f_le_C1_da"] =
        fn / std::max(1e-300, rep.constants["bound_constant_da"] * psin);
    lap("certify", rep);
    return rep;
}

}  // namespace ac4
