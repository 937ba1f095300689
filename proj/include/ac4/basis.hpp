#pragma once
// Real trigonometric Fourier-Galerkin bases on sectors of form fields, with
// metric-Gram orthonormalization (Eigen dense).  Shared by the truncated
// operator assembly and the kernel extractors.

#include <Eigen/Dense>

#include "ac4/forms.hpp"

namespace ac4 {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Real scalar trig fields spanning modes |k|_2 <= kmax: the constant and,
/// per representative mode, a cosine and a sine.  Deterministic order.
inline std::vector<Field> real_trig_fields(const GridSpec& g, int kmax, bool include_constant) {
    std::vector<Field> out;
    if (include_constant && kmax >= 0) out.push_back(Field(g, 1.0));
    for (auto& k : mode_list(g, kmax, false)) {
        bool neg = false;
        for (int c = 0; c < 4; ++c) {
            if (k[c] < 0) {
                neg = true;
                break;
            }
            if (k[c] > 0) break;
        }
        if (neg) continue;  // one representative per {k,-k}
        out.push_back(trig_field(g, k, 0.0));
        out.push_back(trig_field(g, k, -0.5 * pi));  // the sine partner
    }
    return out;
}

/// A list of forms made of scalar trig fields times constant component
/// patterns.  `patterns` holds degree-p component vectors.
inline std::vector<Form> sector_raw_basis(const Manifold& M, int degree,
                                          const std::vector<std::vector<cplx>>& patterns, int kmax,
                                          bool include_constant = true) {
    auto scalars = real_trig_fields(M.grid, kmax, include_constant);
    std::vector<Form> out;
    out.reserve(scalars.size() * patterns.size());
    for (const auto& s : scalars)
        for (const auto& pat : patterns) {
            Form f(M.grid, degree);
            for (int k = 0; k < f.ncomp(); ++k) {
                f.c[k] = s;
                f.c[k] *= pat[std::size_t(k)];
            }
            out.push_back(std::move(f));
        }
    return out;
}

/// L2_g-orthonormalizes a list of forms in place (optionally after applying
/// a sector projector), discarding directions below `rank_tol` relative to
/// the largest Gram eigenvalue.  Returns the residual max |G - I| of the
/// final Gram matrix as a certificate.
inline double orthonormalize(const Manifold& M, std::vector<Form>& basis,
                             const FormOp& project = nullptr, double rank_tol = 1e-10) {
    if (project)
        for (auto& b : basis) b = project(b);
    int n = int(basis.size());
    if (n == 0) return 0.0;
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = l2_inner(M, basis[i], basis[j]).real();
            G(i, j) = v;
            G(j, i) = v;
        }
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    double lam_max = es.eigenvalues().maxCoeff();
    std::vector<Form> out;
    for (int m = n - 1; m >= 0; --m) {
        double lam = es.eigenvalues()(m);
        if (lam <= rank_tol * lam_max) break;
        Form f(M.grid, basis[0].p);
        for (int i = 0; i < n; ++i) {
            cplx w = es.eigenvectors()(i, m) / std::sqrt(lam);
            if (w == 0.0) continue;
            for (int k = 0; k < f.ncomp(); ++k) {
                Field t = basis[i].c[k];
                t *= w;
                f.c[k] += t;
            }
        }
        out.push_back(std::move(f));
    }
    basis = std::move(out);
    // certificate
    n = int(basis.size());
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = l2_inner(M, basis[i], basis[j]).real();
            worst = std::max(worst, std::abs(v - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

/// Coefficients of a form against an orthonormal basis.
inline Vec project_coefficients(const Manifold& M, const std::vector<Form>& basis, const Form& a) {
    Vec c(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) c(int(i)) = l2_inner(M, a, basis[i]).real();
    return c;
}

inline Form synthesize(const Manifold& M, const std::vector<Form>& basis, const Vec& coef) {
    Form f(M.grid, basis.empty() ? 0 : basis[0].p);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (int k = 0; k < f.ncomp(); ++k) {
            Field t = basis[i].c[k];
            t *= coef(int(i));
            f.c[k] += t;
        }
    }
    return f;
}

/// Constant component patterns for the standard sectors.
inline std::vector<std::vector<cplx>> scalar_pattern() { return {{1.0}}; }
inline std::vector<std::vector<cplx>> one_form_patterns() {
    std::vector<std::vector<cplx>> p;
    for (int a = 0; a < 4; ++a) {
        std::vector<cplx> v(4, 0.0);
        v[a] = 1.0;
        p.push_back(v);
    }
    return p;
}
inline std::vector<std::vector<cplx>> two_form_patterns() {
    std::vector<std::vector<cplx>> p;
    for (int k = 0; k < 6; ++k) {
        std::vector<cplx> v(6, 0.0);
        v[k] = 1.0;
        p.push_back(v);
    }
    return p;
}

}  // namespace ac4
