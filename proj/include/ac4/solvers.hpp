#pragma once
// Matrix-free iterative solvers on form fields: preconditioned conjugate
// gradients for the self-adjoint elliptic solves and CGLS for least-squares
// solves against first/second-order operators.  All solves are initialized
// at zero so that consistent singular systems return the minimal-norm
// solution; projector hooks keep iterates inside constraint sectors.

#include "ac4/forms.hpp"

namespace ac4 {

struct SolveOptions {
    double tol = 1e-10;  // relative residual target
    int max_iter = 4000;
    bool precondition = true;
    bool deflate = true;  // apply the supplied kernel projection
};

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0;
    bool converged = false;
};

/// Spectral inverse of the flat Laplacian, component-wise; the optional
/// power -1/2 serves as a first-order preconditioner.
inline Field spectral_laplacian_power(const Manifold& M, const Field& f, double power) {
    const auto& g = M.grid;
    Field r = f;
    for (int c = 0; c < 4; ++c) fft_axis(r, g, c, -1);
    auto s = g.strides();
    double floor_ev = 0;
    for (int c = 0; c < 4; ++c)
        if (g.active[c]) floor_ev = std::max(floor_ev, std::pow(2 * pi / g.period[c], 2));
    floor_ev *= 0.5;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double lam = 0;
        for (int c = 0; c < 4; ++c) {
            if (!g.active[c]) continue;
            int k = signed_mode(int((i / s[c]) % std::size_t(g.n[c])), g.n[c]);
            double w = 2 * pi * double(k) / g.period[c];
            lam += w * w;
        }
        r[i] *= std::pow(std::max(lam, floor_ev), power);
    }
    for (int c = 0; c < 4; ++c) fft_axis(r, g, c, +1);
    return r;
}

inline Form spectral_laplacian_power(const Manifold& M, const Form& a, double power) {
    Form r = a;
    for (auto& f : r.c) f = spectral_laplacian_power(M, f, power);
    return r;
}

/// Orthogonal projection complement against an L2-orthonormalized list.
inline Form deflate(const Manifold& M, const std::vector<Form>& basis, Form a) {
    for (const auto& b : basis) {
        cplx c = l2_inner(M, a, b);
        a -= c * b;
    }
    return a;
}

/// Preconditioned conjugate gradients for a self-adjoint PSD operator in
/// the L2_g inner product.  `project` is applied to the right-hand side and
/// to running residuals (sector constraint + kernel deflation).
inline Form cg_solve(const Manifold& M, const FormOp& op, const Form& rhs, const FormOp& project,
                     const FormOp& precond, const SolveOptions& opt, SolveStats& stats) {
    Form b = project ? project(rhs) : rhs;
    double bnorm = l2_norm(M, b);
    Form x(M.grid, b.p);
    stats = {};
    if (bnorm == 0.0) {
        stats.converged = true;
        return x;
    }
    Form r = b;
    Form z = precond ? precond(r) : r;
    if (project) z = project(z);
    Form p = z;
    double rz = l2_inner(M, r, z).real();
    double best = 1e300;
    Form best_x = x;
    int stall = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        Form q = op(p);
        double pq = l2_inner(M, p, q).real();
        if (!(pq > 0) || !std::isfinite(pq)) break;  // indefinite direction: stop
        double alpha = rz / pq;
        for (int k = 0; k < x.ncomp(); ++k) {
            Field ap = p.c[k];
            ap *= alpha;
            x.c[k] += ap;
            Field aq = q.c[k];
            aq *= alpha;
            r.c[k] -= aq;
        }
        if (project) r = project(r);
        double rn = l2_norm(M, r) / bnorm;
        stats.iterations = it + 1;
        stats.rel_residual = rn;
        if (rn < best - 1e-16) {
            best = rn;
            best_x = x;
            stall = 0;
        } else if (++stall > 60) {
            break;  // residual floor (aliasing or roundoff)
        }
        if (rn <= opt.tol) {
            stats.converged = true;
            return x;
        }
        z = precond ? precond(r) : r;
        if (project) z = project(z);
        double rz_new = l2_inner(M, r, z).real();
        double beta = rz_new / rz;
        rz = rz_new;
        for (int k = 0; k < p.ncomp(); ++k) {
            Field bp = p.c[k];
            bp *= beta;
            p.c[k] = z.c[k] + bp;
        }
    }
    stats.rel_residual = best;
    stats.converged = best <= opt.tol;
    return best_x;
}

/// CGLS for min |A x - b| with explicit adjoint and optional symmetric
/// right preconditioner N (x = N y).  Returns the minimal-norm minimizer of
/// the preconditioned problem; `project_x` constrains the solution sector.
struct CglsResult {
    Form x;
    double rel_residual = 0;  // |Ax-b|/|b|
    int iterations = 0;
    bool converged = false;
};

inline CglsResult cgls_solve(const Manifold& M, const FormOp& A, const FormOp& At, const Form& b,
                             const FormOp& N, const FormOp& project_x, const SolveOptions& opt) {
    CglsResult out;
    double bnorm = l2_norm(M, b);
    // fold the sector projection into the symmetric right preconditioner
    auto Np = [&](Form v) {
        if (project_x) v = project_x(v);
        if (N) v = N(v);
        if (project_x) v = project_x(v);
        return v;
    };
    auto B = [&](const Form& v) { return A(Np(v)); };
    auto Bt = [&](const Form& v) { return Np(At(v)); };

    Form r = b;
    Form s = Bt(r);
    Form y = s;
    for (auto& f : y.c)
        for (auto& v : f.v) v = 0.0;
    if (bnorm == 0.0) {
        out.x = Np(y);
        out.converged = true;
        return out;
    }
    Form p = s;
    double gamma = l2_inner(M, s, s).real();
    double best = 1e300;
    Form best_y = y;
    int stall = 0;
    for (int it = 0; it < opt.max_iter && gamma > 0; ++it) {
        Form q = B(p);
        double qq = l2_inner(M, q, q).real();
        if (!(qq > 0) || !std::isfinite(qq)) break;
        double alpha = gamma / qq;
        for (int k = 0; k < y.ncomp(); ++k) {
            Field ap = p.c[k];
            ap *= alpha;
            y.c[k] += ap;
        }
        for (int k = 0; k < r.ncomp(); ++k) {
            Field aq = q.c[k];
            aq *= alpha;
            r.c[k] -= aq;
        }
        double rn = l2_norm(M, r) / bnorm;
        out.iterations = it + 1;
        out.rel_residual = rn;
        if (rn < best - 1e-16) {
            best = rn;
            best_y = y;
            stall = 0;
        } else if (++stall > 40) {
            break;  // residual floor
        }
        if (rn <= opt.tol) {
            out.converged = true;
            best_y = y;
            best = rn;
            break;
        }
        s = Bt(r);
        double gamma_new = l2_inner(M, s, s).real();
        double beta = gamma_new / gamma;
        gamma = gamma_new;
        for (int k = 0; k < p.ncomp(); ++k) {
            Field bp = p.c[k];
            bp *= beta;
            p.c[k] = s.c[k] + bp;
        }
    }
    out.rel_residual = best;
    out.converged = best <= opt.tol;
    out.x = Np(best_y);
    return out;
}

}  // namespace ac4
