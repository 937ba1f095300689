#include <catch2/catch_amalgamated.hpp>

#include "ac4/catalog.hpp"

using namespace ac4;

namespace {
const Manifold& flat() {
    static Manifold M = build_manifold("flat_torus_kahler", GridSpec::make({8, 8, 8, 8}));
    return M;
}
const Manifold& kt() {
    static Manifold M = build_manifold("kodaira_thurston", GridSpec::make({8, 8, 8, 1}));
    return M;
}
const Manifold& pert() {
    static Manifold M =
        build_manifold("torus_perturbed", GridSpec::make({16, 16, 16, 16}), {{"eps", 0.1}});
    return M;
}
}  // namespace

TEST_CASE("catalog invariants hold on every member") {
    for (const Manifold* M : {&flat(), &kt(), &pert()}) {
        auto r = validate_manifold(*M);
        INFO(M->name);
        CHECK(r["j_squared"] < 1e-13);
        CHECK(r["coframe_duality"] < 1e-12);
        CHECK(r["taming_margin"] > 0.0);
        CHECK(r["f_frame_identity"] < 1e-12);
        CHECK(r["d_omega"] < 1e-12);
        CHECK(r["g_j_invariance"] < 1e-13);
        CHECK(r["f_j_invariance"] < 1e-13);
        CHECK(r["omega_minus_on_vjv"] < 1e-13);
    }
}

TEST_CASE("flat torus is the compatible baseline") {
    const auto& M = flat();
    REQUIRE(M.integrable);
    REQUIRE(M.almost_kahler);
    // F == omega, omega^- == 0, g Euclidean
    for (int k = 0; k < 6; ++k) {
        Field d = M.F[k] - M.omega[k];
        REQUIRE(max_abs(d) < 1e-15);
        REQUIRE(max_abs(M.omega_minus[k]) < 1e-15);
    }
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double expect = a == b ? 1.0 : 0.0;
            Field d = M.gmat[a * 4 + b];
            for (auto& x : d.v) x -= expect;
            REQUIRE(max_abs(d) < 1e-15);
        }
    REQUIRE(max_abs(M.rho - Field(M.grid, 1.0)) < 1e-14);
}

TEST_CASE("anti-taming omega is rejected") {
    const auto& M = flat();
    std::array<Field, 6> wneg;
    for (int k = 0; k < 6; ++k) {
        wneg[k] = M.omega[k];
        wneg[k] *= -1.0;
    }
    std::array<Field, 6> F, om;
    std::array<Field, 16> G;
    REQUIRE(taming_margin(M.grid, M.Jmat, wneg) < 0.0);
    REQUIRE_THROWS_AS(hermitian_from_taming(M.grid, M.Jmat, wneg, F, om, G), numerical_error);
}

TEST_CASE("perturbed torus: conjugated J, strict taming, nontrivial omega^-") {
    const auto& M = pert();
    REQUIRE_FALSE(M.integrable);
    REQUIRE_FALSE(M.almost_kahler);
    REQUIRE(M.eps_max > 0.15);  // 0.1 sits safely inside the family
    double om = 0;
    for (auto& f : M.omega_minus) om = std::max(om, max_abs(f));
    REQUIRE(om > 1e-3);
    // metric varies but stays close to Euclidean at eps = 0.1
    double dev = 0;
    for (int a = 0; a < 4; ++a) {
        Field d = M.gmat[a * 4 + a];
        for (auto& x : d.v) x -= 1.0;
        dev = std::max(dev, max_abs(d));
    }
    REQUIRE(dev > 1e-4);
    REQUIRE(dev < 0.5);

    REQUIRE_THROWS_AS(build_manifold("torus_perturbed", GridSpec::make({8, 8, 8, 8}),
                                     {{"eps", 1.5}}),
                      numerical_error);
}

TEST_CASE("unitary coframe of the catalog members") {
    // flat: theta^1 = (dt - i dx)/sqrt2, theta^2 = (dy - i dz)/sqrt2
    const auto& M = flat();
    double s = 1.0 / std::sqrt(2.0);
    std::size_t i = 5;
    REQUIRE(std::abs(M.Th[0][0][i] - cplx(s, 0)) < 1e-14);
    REQUIRE(std::abs(M.Th[0][1][i] - cplx(0, -s)) < 1e-14);
    REQUIRE(std::abs(M.Th[1][2][i] - cplx(s, 0)) < 1e-14);
    REQUIRE(std::abs(M.Th[1][3][i] - cplx(0, -s)) < 1e-14);
    // Kodaira-Thurston: theta^2 = (dy - i gamma)/sqrt2 in the invariant coframe
    const auto& K = kt();
    REQUIRE(std::abs(K.Th[1][2][i] - cplx(s, 0)) < 1e-14);
    REQUIRE(std::abs(K.Th[1][3][i] - cplx(0, -s)) < 1e-14);
    REQUIRE(std::abs(K.Th[1][0][i]) < 1e-14);
}

TEST_CASE("dual coframe: linearity under frame rescaling") {
    const auto& M = kt();
    std::array<std::array<Field, 4>, 2> U2 = M.U;
    for (int j = 0; j < 2; ++j)
        for (int a = 0; a < 4; ++a) U2[j][a] *= 2.0;
    auto dual = dual_coframe(M, U2);
    REQUIRE(dual.residual < 1e-12);
    for (int j = 0; j < 2; ++j)
        for (int a = 0; a < 4; ++a) {
            Field d = dual.theta[j][a] - 0.5 * M.Th[j][a];
            REQUIRE(max_abs(d) < 1e-13);
        }
}

TEST_CASE("Kodaira-Thurston frame divergences vanish") {
    const auto& M = kt();
    for (int a = 0; a < 4; ++a) REQUIRE(max_abs(frame_divergence(M, a)) < 1e-12);
}

TEST_CASE("z-invariant sector is closed under the frame derivations") {
    const auto& M = kt();
    REQUIRE_FALSE(M.grid.active[3]);
    std::mt19937_64 rng(3);
    Field f = random_band_field(M.grid, 2, rng);
    for (int a = 0; a < 4; ++a) {
        Field g = frame_apply(M, a, f);
        REQUIRE(g.size() == M.grid.size());  // stays a z-invariant grid field
    }
    // e_z acts as zero on the sector
    REQUIRE(max_abs(frame_apply(M, 3, f)) < 1e-13);
}

TEST_CASE("grid mismatch guards") {
    REQUIRE_THROWS_AS(build_manifold("kodaira_thurston", GridSpec::make({8, 8, 8, 8})),
                      config_error);
    REQUIRE_THROWS_AS(build_manifold("flat_torus_kahler", GridSpec::make({8, 8, 8, 1})),
                      config_error);
    REQUIRE_THROWS_AS(build_manifold("nope", GridSpec::make({8, 8, 8, 8})), config_error);
}
