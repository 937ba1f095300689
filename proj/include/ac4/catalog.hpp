#pragma once
// Manifold catalog builders: flat Kahler torus, conjugation-perturbed torus
// (tamed but not compatible), and the Kodaira-Thurston nilmanifold in its
// invariant coframe {dt, dx, dy, dz - x dy}, restricted to the z-invariant
// sector.

#include "ac4/forms.hpp"

namespace ac4 {

inline const std::vector<std::string>& catalog_ids() {
    static const std::vector<std::string> ids = {"flat_torus_kahler", "torus_perturbed",
                                                 "kodaira_thurston"};
    return ids;
}

namespace detail {

inline void block_j(Manifold& M) {
    for (auto& f : M.Jmat) f = Field(M.grid, 0.0);
    auto set = [&](int b, int a, double v) {
        for (auto& x : M.Jmat[b * 4 + a].v) x = v;
    };
    set(1, 0, 1.0);   // J e0 = e1
    set(0, 1, -1.0);  // J e1 = -e0
    set(3, 2, 1.0);   // J e2 = e3
    set(2, 3, -1.0);  // J e3 = -e2
}

inline void standard_omega(Manifold& M) {
    for (auto& f : M.omega) f = Field(M.grid, 0.0);
    for (auto& x : M.omega[index2(0, 1)].v) x = 1.0;
    for (auto& x : M.omega[index2(2, 3)].v) x = 1.0;
}

inline void identity_frame(Manifold& M) {
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) {
            M.frame_coef[a][c] = Field(M.grid, a == c ? 1.0 : 0.0);
            for (int d = 0; d < 4; ++d) M.frame_coef_grad[a][c][d] = Field(M.grid, 0.0);
        }
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 6; ++m) M.dcoframe[a][m] = Field(M.grid, 0.0);
}

inline void finish_build(Manifold& M) {
    hermitian_from_taming(M.grid, M.Jmat, M.omega, M.F, M.omega_minus, M.gmat);
    if (taming_margin(M.grid, M.Jmat, M.omega) <= 0)
        throw numerical_error(M.name + ": omega does not tame J");
    finalize_metric(M);
    build_complex_frame(M);
    M.refresh_sparsity();
    double jr = j_squared_residual(M);
    if (jr > 1e-12) throw numerical_error(M.name + ": J^2 + I residual " + std::to_string(jr));
    double dr = coframe_duality_residual(M);
    if (dr > 1e-12) throw numerical_error(M.name + ": coframe duality residual");
    // omega is almost Kahler iff the anti-invariant part vanishes and F is
    // coframe-constant (catalog members: both tori have dF = 0 only in the
    // flat case; the flag records omega == F)
    double om = 0;
    for (auto& f : M.omega_minus) om = std::max(om, max_abs(f));
    M.almost_kahler = om < 1e-14;
}

/// Fixed low-mode perturbation matrix used by the torus_perturbed family.
inline void perturbation_matrix(const GridSpec& g, std::size_t i, double B[16]) {
    auto x = g.point(i);
    auto s = [&](int c) { return std::sin(2.0 * pi * x[c] / g.period[c]); };
    auto co = [&](int c) { return std::cos(2.0 * pi * x[c] / g.period[c]); };
    for (int k = 0; k < 16; ++k) B[k] = 0;
    B[0 * 4 + 2] = 0.7 * s(2);
    B[2 * 4 + 0] = 0.5 * co(3);
    B[1 * 4 + 3] = 0.6 * s(0) * co(1);
    B[3 * 4 + 1] = 0.4 * co(2);
    B[0 * 4 + 3] = 0.3 * s(1);
}

inline void perturbed_j(Manifold& M, double eps) {
    block_j(M);
    const auto& g = M.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double B[16];
        perturbation_matrix(g, i, B);
        cplx A[16], Ai[16], J0[16], T1[16], J[16];
        for (int k = 0; k < 16; ++k) {
            A[k] = eps * B[k];
            J0[k] = M.Jmat[k][i];
        }
        for (int d = 0; d < 4; ++d) A[d * 4 + d] += 1.0;
        if (!invert4(A, Ai)) throw numerical_error("torus_perturbed: singular conjugation");
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                cplx acc = 0;
                for (int k = 0; k < 4; ++k) acc += J0[r * 4 + k] * Ai[k * 4 + c];
                T1[r * 4 + c] = acc;
            }
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                cplx acc = 0;
                for (int k = 0; k < 4; ++k) acc += A[r * 4 + k] * T1[k * 4 + c];
                J[r * 4 + c] = acc;
            }
        for (int k = 0; k < 16; ++k) M.Jmat[k][i] = J[k];
    }
}

/// Largest eps with positive taming margin, by bisection on the check.
inline double perturbed_eps_max(const GridSpec& g) {
    auto margin = [&](double eps) {
        Manifold t;
        t.grid = g;
        identity_frame(t);
        standard_omega(t);
        try {
            perturbed_j(t, eps);
        } catch (const numerical_error&) {
            return -1.0;
        }
        return taming_margin(g, t.Jmat, t.omega);
    };
    double lo = 0.0, hi = 1.0;
    while (margin(hi) > 0 && hi < 8.0) {
        lo = hi;
        hi *= 2.0;
    }
    if (hi >= 8.0) return hi;  // effectively unbounded for this recipe
    for (int it = 0; it < 24; ++it) {
        double mid = 0.5 * (lo + hi);
        (margin(mid) > 0 ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace detail

inline Manifold build_manifold(const std::string& id, const GridSpec& grid,
                               const std::map<std::string, double>& params = {}) {
    Manifold M;
    M.name = id;
    M.grid = grid;
    M.params = params;
    if (id == "flat_torus_kahler") {
        for (int c = 0; c < 4; ++c)
            if (!grid.active[c]) throw config_error("flat_torus_kahler needs a 4d grid");
        detail::identity_frame(M);
        detail::block_j(M);
        detail::standard_omega(M);
        M.integrable = true;
    } else if (id == "kodaira_thurston") {
        if (!(grid.active[0] && grid.active[1] && grid.active[2]) || grid.active[3])
            throw config_error("kodaira_thurston lives on the z-invariant sector: t,x,y active");
        detail::identity_frame(M);
        // e2 = d/dy + x d/dz in coordinates; x is the coordinate, stored with
        // its analytic gradient since it is not grid-periodic
        for (std::size_t i = 0; i < grid.size(); ++i) M.frame_coef[2][3][i] = grid.point(i)[1];
        for (auto& v : M.frame_coef_grad[2][3][1].v) v = 1.0;
        // d(gamma) = -dx ^ dy
        for (auto& v : M.dcoframe[3][index2(1, 2)].v) v = -1.0;
        detail::block_j(M);
        detail::standard_omega(M);
        M.integrable = false;
    } else if (id == "torus_perturbed") {
        for (int c = 0; c < 4; ++c)
            if (!grid.active[c]) throw config_error("torus_perturbed needs a 4d grid");
        double eps = params.count("eps") ? params.at("eps") : 0.1;
        detail::identity_frame(M);
        detail::standard_omega(M);
        M.eps_max = detail::perturbed_eps_max(grid);
        if (eps < 0 || eps >= M.eps_max)
            throw numerical_error("torus_perturbed: eps outside the tamed range [0, " +
                                  std::to_string(M.eps_max) + ")");
        detail::perturbed_j(M, eps);
        M.integrable = eps == 0.0;
    } else {
        throw config_error("unknown manifold id: " + id);
    }
    detail::finish_build(M);
    return M;
}

// ---------------------------------------------------------------------------
// whole-spec validation

/// Residuals of the structural invariants every built spec must satisfy.
inline std::map<std::string, double> validate_manifold(const Manifold& M) {
    std::map<std::string, double> r;
    r["j_squared"] = j_squared_residual(M);
    r["coframe_duality"] = coframe_duality_residual(M);
    r["taming_margin"] = taming_margin(M.grid, M.Jmat, M.omega);

    // F = -i (theta^1 ^ theta^1bar + theta^2 ^ theta^2bar): the sign carried
    // by the -i eigenspace frame convention (see manifold.hpp).
    Form fid = coframe_wedge(M, 0, false, 0, true);
    fid += coframe_wedge(M, 1, false, 1, true);
    fid *= cplx(0, -1);
    fid -= fundamental_form(M);
    r["f_frame_identity"] = max_abs(fid);

    // d omega = 0 and d F for the almost Kahler flag
    r["d_omega"] = max_abs(exterior_d(M, taming_form(M)));
    r["omega_minus_on_vjv"] = 0.0;
    {
        // anti-invariant forms vanish on (v, Jv) pairs: sampled check
        std::mt19937_64 rng(77);
        std::normal_distribution<double> nd;
        double worst = 0;
        const Form om = anti_invariant_part_of_omega(M);
        for (int s = 0; s < 8; ++s) {
            double v[4];
            for (auto& q : v) q = nd(rng);
            std::size_t i = (M.npoints() / 2 + 37 * s) % M.npoints();
            cplx J[16], w[6], Wm[16];
            for (int k = 0; k < 16; ++k) J[k] = M.Jmat[k][i];
            for (int k = 0; k < 6; ++k) w[k] = om.c[k][i];
            detail::two_form_matrix(w, Wm);
            cplx jv[4] = {0, 0, 0, 0}, val = 0;
            for (int b = 0; b < 4; ++b)
                for (int a = 0; a < 4; ++a) jv[b] += J[b * 4 + a] * v[a];
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) val += v[a] * Wm[a * 4 + b] * jv[b];
            worst = std::max(worst, std::abs(val));
        }
        r["omega_minus_on_vjv"] = worst;
    }

    // metric J-invariance pointwise
    double gj = 0;
    for (std::size_t i = 0; i < M.npoints(); ++i) {
        cplx J[16], G[16];
        for (int k = 0; k < 16; ++k) {
            J[k] = M.Jmat[k][i];
            G[k] = M.gmat[k][i];
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                cplx acc = -G[a * 4 + b];
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q)
                        acc += J[p * 4 + a] * G[p * 4 + q] * J[q * 4 + b];
                gj = std::max(gj, std::abs(acc));
            }
    }
    r["g_j_invariance"] = gj;

    // F J-invariance
    Form jf = j_act(M, fundamental_form(M));
    jf -= fundamental_form(M);
    r["f_j_invariance"] = max_abs(jf);
    return r;
}

/// Dual coframe of a supplied complex frame (frame components), with the
/// duality residual; the catalog stores the same data on build.
struct DualCoframe {
    std::array<std::array<Field, 4>, 2> theta;
    double residual = 0;
};

inline DualCoframe dual_coframe(const Manifold& M, const std::array<std::array<Field, 4>, 2>& U) {
    DualCoframe out;
    for (int j = 0; j < 2; ++j)
        for (int a = 0; a < 4; ++a) out.theta[j][a] = Field(M.grid, 0.0);
    for (std::size_t i = 0; i < M.npoints(); ++i) {
        cplx WT[16], Wi[16];
        for (int a = 0; a < 4; ++a) {
            WT[a * 4 + 0] = U[0][a][i];
            WT[a * 4 + 1] = U[1][a][i];
            WT[a * 4 + 2] = std::conj(U[0][a][i]);
            WT[a * 4 + 3] = std::conj(U[1][a][i]);
        }
        if (!invert4(WT, Wi)) throw numerical_error("dual_coframe: singular frame matrix");
        for (int a = 0; a < 4; ++a) {
            out.theta[0][a][i] = Wi[0 * 4 + a];
            out.theta[1][a][i] = Wi[1 * 4 + a];
        }
        for (int r = 0; r < 2; ++r)
            for (int j = 0; j < 4; ++j) {
                cplx d = 0;
                for (int a = 0; a < 4; ++a) d += Wi[r * 4 + a] * WT[a * 4 + j];
                out.residual = std::max(out.residual, std::abs(d - (r == j ? 1.0 : 0.0)));
            }
    }
    return out;
}

}  // namespace ac4
