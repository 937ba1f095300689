#include <catch2/catch_amalgamated.hpp>

#include "ac4/catalog.hpp"

using namespace ac4;

namespace {
const Manifold& flat() {
    static Manifold M = build_manifold("flat_torus_kahler", GridSpec::make({8, 8, 8, 8}));
    return M;
}
const Manifold& kt() {
    static Manifold M = build_manifold("kodaira_thurston", GridSpec::make({16, 16, 16, 1}));
    return M;
}
const Manifold& pert() {
    static Manifold M =
        build_manifold("torus_perturbed", GridSpec::make({16, 16, 16, 16}), {{"eps", 0.1}});
    return M;
}

double rel(double err, double scale) { return err / std::max(scale, 1e-300); }
}  // namespace

TEST_CASE("d o d = 0") {
    std::mt19937_64 rng(11);
    for (const Manifold* M : {&flat(), &kt(), &pert()}) {
        for (int p = 0; p <= 2; ++p) {
            Form a = random_form(*M, p, 2, rng);
            Form dda = exterior_d(*M, exterior_d(*M, a));
            INFO(M->name << " degree " << p);
            CHECK(rel(max_abs(dda), max_abs(a)) < 1e-10);
        }
    }
}

TEST_CASE("double Hodge star is (-1)^p in dimension four") {
    std::mt19937_64 rng(12);
    for (const Manifold* M : {&flat(), &kt(), &pert()}) {
        for (int p = 0; p <= 4; ++p) {
            Form a = random_form(*M, p, 1, rng);
            Form ssa = hodge_star(*M, hodge_star(*M, a));
            double sign = (p % 2 == 0) ? 1.0 : -1.0;
            Form d = ssa - sign * a;
            INFO(M->name << " degree " << p);
            CHECK(rel(max_abs(d), max_abs(a)) < 1e-12);
        }
    }
}

TEST_CASE("beta ^ *alpha = <beta,alpha> vol pointwise") {
    std::mt19937_64 rng(13);
    for (const Manifold* M : {&flat(), &pert()}) {
        Form a = random_form(*M, 2, 1, rng), b = random_form(*M, 2, 1, rng);
        Form w = wedge(M->grid, b, hodge_star(*M, a));
        Field ip = pointwise_inner(*M, b, a);
        Field lhs = w.c[0];
        Field rhs = multiply(ip, M->rho);
        Field d = lhs - rhs;
        CHECK(rel(max_abs(d), max_abs(rhs)) < 1e-12);
    }
}

TEST_CASE("adjointness of d and d*") {
    std::mt19937_64 rng(14);
    for (const Manifold* M : {&flat(), &kt()}) {
        for (int p = 1; p <= 3; ++p) {
            Form a = random_form(*M, p - 1, 2, rng);
            Form b = random_form(*M, p, 2, rng);
            cplx lhs = l2_inner(*M, exterior_d(*M, a), b);
            cplx rhs = l2_inner(*M, a, codifferential(*M, b));
            INFO(M->name << " degree " << p);
            CHECK(std::abs(lhs - rhs) < 1e-10 * (std::abs(lhs) + 1.0));
        }
    }
    // variable metric: products alias past the band, tolerance reflects it
    {
        const Manifold& M = pert();
        Form a = random_form(M, 1, 2, rng);
        Form b = random_form(M, 2, 2, rng);
        cplx lhs = l2_inner(M, exterior_d(M, a), b);
        cplx rhs = l2_inner(M, a, codifferential(M, b));
        CHECK(std::abs(lhs - rhs) < 1e-8 * (std::abs(lhs) + 1.0));
    }
}

TEST_CASE("*J alpha = alpha ^ F for 1-forms") {
    std::mt19937_64 rng(15);
    for (const Manifold* M : {&flat(), &kt(), &pert()}) {
        Form a = random_form(*M, 1, 2, rng);
        Form lhs = hodge_star(*M, j_act(*M, a));
        Form rhs = wedge(M->grid, a, fundamental_form(*M));
        Form d = lhs - rhs;
        INFO(M->name);
        CHECK(rel(max_abs(d), max_abs(rhs)) < 1e-12);
    }
}

TEST_CASE("J action: eigenvalues and coordinate example") {
    const Manifold& M = flat();
    std::mt19937_64 rng(16);
    // J^2 = -1 on 1-forms, +1 on 2-forms
    Form a1 = random_form(M, 1, 2, rng);
    Form jja1 = j_act(M, j_act(M, a1));
    CHECK(rel(max_abs(jja1 + a1), max_abs(a1)) < 1e-13);
    Form a2 = random_form(M, 2, 2, rng);
    Form jja2 = j_act(M, j_act(M, a2));
    CHECK(rel(max_abs(jja2 - a2), max_abs(a2)) < 1e-13);

    // F is J-invariant; theta^1^theta^2 is anti-invariant
    Form jf = j_act(M, fundamental_form(M)) - fundamental_form(M);
    CHECK(max_abs(jf) < 1e-13);
    Form t12 = coframe_wedge(M, 0, false, 1, false);
    Form jt = j_act(M, t12) + t12;
    CHECK(max_abs(jt) < 1e-13);

    // (J dt)(v) = dt(Jv): with J dt/dt = dx this gives J dt = -dx
    Form dt(M.grid, 1);
    for (auto& x : dt.c[0].v) x = 1.0;
    Form jdt = j_act(M, dt);
    CHECK(max_abs(jdt.c[0]) < 1e-14);
    Field expect(M.grid, -1.0);
    CHECK(max_abs(jdt.c[1] - expect) < 1e-14);
}

TEST_CASE("wedge algebra") {
    const Manifold& M = kt();
    std::mt19937_64 rng(17);
    // dt ^ dt = 0
    Form dt(M.grid, 1);
    for (auto& x : dt.c[0].v) x = 1.0;
    CHECK(max_abs(wedge(M.grid, dt, dt)) < 1e-15);

    // F ^ F = 2 vol
    Form ff = wedge(M.grid, fundamental_form(M), fundamental_form(M));
    Form two_vol = 2.0 * volume_form(M);
    CHECK(max_abs(ff - two_vol) < 1e-13);

    // graded commutativity and associativity on random fields
    Form a = random_form(M, 1, 2, rng), b = random_form(M, 1, 2, rng),
         c = random_form(M, 2, 2, rng);
    Form ab = wedge(M.grid, a, b), ba = wedge(M.grid, b, a);
    CHECK(max_abs(ab + ba) < 1e-13 * std::max(1.0, max_abs(ab)));
    Form left = wedge(M.grid, wedge(M.grid, a, b), c);
    Form right = wedge(M.grid, a, wedge(M.grid, b, c));
    CHECK(rel(max_abs(left - right), max_abs(left)) < 1e-13);

    REQUIRE_THROWS_AS(wedge(M.grid, c, wedge(M.grid, c, c)), error);
}

TEST_CASE("hodge star basics") {
    const Manifold& M = flat();
    Form one(M.grid, 0);
    for (auto& x : one.c[0].v) x = 1.0;
    Form vol = hodge_star(M, one);
    CHECK(max_abs(vol.c[0] - Field(M.grid, 1.0)) < 1e-14);
    // *F = F (self-dual)
    Form sf = hodge_star(M, fundamental_form(M)) - fundamental_form(M);
    CHECK(max_abs(sf) < 1e-13);
}

TEST_CASE("exterior derivative examples") {
    const Manifold& M = kt();
    // d const = 0
    Form c0(M.grid, 0);
    for (auto& x : c0.c[0].v) x = 2.5;
    CHECK(max_abs(exterior_d(M, c0)) < 1e-13);

    // d sin(2 pi t) = 2 pi cos(2 pi t) dt
    Field f(M.grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(2 * pi * M.grid.point(i)[0]);
    Form df = d_scalar(M, f);
    double worst = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst,
                         std::abs(df.c[0][i] - 2 * pi * std::cos(2 * pi * M.grid.point(i)[0])));
    CHECK(worst < 1e-10);
    for (int k = 1; k < 4; ++k) CHECK(max_abs(df.c[k]) < 1e-12);

    // d gamma = -dx ^ dy in the invariant coframe
    Form gamma(M.grid, 1);
    for (auto& x : gamma.c[3].v) x = 1.0;
    Form dg = exterior_d(M, gamma);
    Field expect(M.grid, -1.0);
    CHECK(max_abs(dg.c[index2(1, 2)] - expect) < 1e-14);
    double rest = 0;
    for (int k = 0; k < 6; ++k)
        if (k != index2(1, 2)) rest = std::max(rest, max_abs(dg.c[k]));
    CHECK(rest < 1e-14);

    // the same structure constant from the bracket route: d eps^s(e_a,e_b)
    // must equal -eps^s([e_a,e_b]); [e_x,e_y] = e_z on this frame
    // (coefficient extraction is exercised in the frame-calculus tests)
}

TEST_CASE("codifferential identities") {
    std::mt19937_64 rng(18);
    // d*(f F) = 0 for constant f on the flat torus (parallel form)
    {
        const Manifold& M = flat();
        Form fF = fundamental_form(M);
        fF *= 3.0;
        CHECK(max_abs(codifferential(M, fF)) < 1e-13);
    }
    // chain identity d*(f omega) = J df - *(df ^ omega^-), omega closed
    for (const Manifold* Mp : {&flat(), &kt(), &pert()}) {
        const Manifold& M = *Mp;
        Field f = random_band_field(M.grid, 2, rng, false);
        Form fw = scalar_times(f, taming_form(M));
        Form lhs = codifferential(M, fw);
        Form df = d_scalar(M, f);
        Form rhs = j_act(M, df) -
                   hodge_star(M, wedge(M.grid, df, anti_invariant_part_of_omega(M)));
        double tol = (Mp == &pert()) ? 1e-8 : 1e-10;
        INFO(M.name);
        CHECK(rel(max_abs(lhs - rhs), max_abs(rhs)) < tol);
    }
}

TEST_CASE("self-dual / anti-self-dual split") {
    std::mt19937_64 rng(19);
    const Manifold& M = kt();
    Form b = random_form(M, 2, 2, rng);
    auto [bp, bm] = split_pm(M, b);
    CHECK(rel(max_abs(bp + bm - b), max_abs(b)) < 1e-13);
    Form sp = hodge_star(M, bp) - bp;
    Form sm = hodge_star(M, bm) + bm;
    CHECK(max_abs(sp) < 1e-12);
    CHECK(max_abs(sm) < 1e-12);
    CHECK(std::abs(l2_inner(M, bp, bm)) < 1e-10);

    auto [fp, fm] = split_pm(M, fundamental_form(M));
    CHECK(max_abs(fp - fundamental_form(M)) < 1e-13);
    CHECK(max_abs(fm) < 1e-13);
}

TEST_CASE("J-type split of 2-forms") {
    std::mt19937_64 rng(20);
    const Manifold& M = pert();
    Form b = random_form(M, 2, 2, rng);
    auto tc = split_type(M, b);
    // parts sum to the original
    Form sum = tc.p11 + tc.p20 + tc.p02;
    CHECK(rel(max_abs(sum - b), max_abs(b)) < 1e-12);
    // J = +1 on (1,1), -1 on (2,0)+(0,2)
    CHECK(rel(max_abs(j_act(M, tc.p11) - tc.p11), max_abs(b)) < 1e-12);
    Form anti = tc.p20 + tc.p02;
    CHECK(rel(max_abs(j_act(M, anti) + anti), max_abs(b)) < 1e-12);
    // primitive part is trace-free
    CHECK(max_abs(lambda_contract(M, tc.primitive)) < 1e-11);
    // trace of F is 2
    Field lf = lambda_contract(M, fundamental_form(M));
    for (auto& x : lf.v) x -= 2.0;
    CHECK(max_abs(lf) < 1e-12);
    // (2,0) form has zero trace
    Form t12 = coframe_wedge(M, 0, false, 1, false);
    CHECK(max_abs(lambda_contract(M, t12)) < 1e-12);
}

TEST_CASE("d+/d- and the J-type refinement of d+") {
    std::mt19937_64 rng(21);
    for (const Manifold* Mp : {&flat(), &kt(), &pert()}) {
        const Manifold& M = *Mp;
        Form a = random_form(M, 1, 2, rng);
        // global norm identity |d+ a| = |d- a| (integral of da^da vanishes)
        double np = l2_norm(M, d_plus(M, a));
        double nm = l2_norm(M, d_minus(M, a));
        INFO(M.name);
        CHECK(std::abs(np * np - nm * nm) < 1e-8 * (np * np + 1));

        // d+ a = d-_J a + (Lambda_F d+_J a / 2) F, fieldwise
        Form lhs = d_plus(M, a);
        Field tr = lambda_contract(M, d_plus_j(M, a));
        tr *= 0.5;
        Form rhs = d_minus_j(M, a) + scalar_times(tr, fundamental_form(M));
        CHECK(rel(max_abs(lhs - rhs), max_abs(lhs)) < 1e-10);

        // both J-projections of d(df) = 0 vanish
        Field f = random_band_field(M.grid, 2, rng);
        Form df = d_scalar(M, f);
        CHECK(rel(max_abs(d_plus_j(M, df)), max_abs(df)) < 1e-10);
        CHECK(rel(max_abs(d_minus_j(M, df)), max_abs(df)) < 1e-10);
    }
}

TEST_CASE("graded Leibniz rule") {
    std::mt19937_64 rng(22);
    const Manifold& M = kt();
    Form a = random_form(M, 1, 2, rng);
    Form b1 = random_form(M, 1, 2, rng);
    Form b2 = random_form(M, 2, 2, rng);
    for (const Form* b : {&b1, &b2}) {
        Form lhs = exterior_d(M, wedge(M.grid, a, *b));
        Form rhs = wedge(M.grid, exterior_d(M, a), *b) - wedge(M.grid, a, exterior_d(M, *b));
        CHECK(rel(max_abs(lhs - rhs), max_abs(lhs)) < 1e-9);
    }
}

TEST_CASE("anti-invariant forms are self-dual") {
    std::mt19937_64 rng(23);
    const Manifold& M = pert();
    Form b = anti_invariant_part(M, random_form(M, 2, 2, rng));
    Form sb = hodge_star(M, b) - b;
    CHECK(rel(max_abs(sb), max_abs(b)) < 1e-12);
}
