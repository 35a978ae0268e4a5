#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nslab/norms.hpp"
#include "nslab/operators.hpp"
#include "oracles.hpp"

using namespace nslab;

namespace {

SpectralField preset(DatumSpec::Kind kind, double a, int n) {
    DatumSpec spec;
    spec.kind = kind;
    spec.amplitude = a;
    return make_field(spec, n);
}

void check_field_invariants(const SpectralField& f) {
    CHECK(hermitian_defect(f) <= 1e-13);
    CHECK(divergence_defect(f) <= 1e-13);
    CHECK(mean_mode_magnitude(f) == 0.0);
}

} // namespace

TEST_CASE("make_field presets") {
    SUBCASE("zero") {
        const SpectralField f = preset(DatumSpec::Kind::zero, 1.0, 8);
        CHECK(l2_norm_squared(f) == 0.0);
    }
    SUBCASE("kolmogorov L2") {
        const SpectralField f = preset(DatumSpec::Kind::kolmogorov, 1.0, 8);
        CHECK(l2_norm_squared(f) == doctest::Approx(box_volume / 2.0).epsilon(1e-13));
        check_field_invariants(f);
    }
    SUBCASE("taylor-green L2 and divergence") {
        const SpectralField f = preset(DatumSpec::Kind::taylor_green, 1.0, 8);
        CHECK(l2_norm_squared(f) == doctest::Approx(box_volume / 4.0).epsilon(1e-13));
        CHECK(divergence_defect(f) == 0.0);
        check_field_invariants(f);
    }
    SUBCASE("random obeys invariants and amplitude") {
        const SpectralField f = test::random_divfree_field(16, 7, 2.5);
        check_field_invariants(f);
        CHECK(std::sqrt(l2_norm_squared(f)) == doctest::Approx(2.5).epsilon(1e-12));
    }
    SUBCASE("random is deterministic in the seed") {
        const SpectralField a = test::random_divfree_field(8, 42);
        const SpectralField b = test::random_divfree_field(8, 42);
        CHECK(test::max_coeff_distance(a, b) == 0.0);
        const SpectralField c = test::random_divfree_field(8, 43);
        CHECK(test::max_coeff_distance(a, c) > 0.0);
    }
    SUBCASE("validation") {
        DatumSpec spec;
        CHECK_THROWS_AS(make_field(spec, 7), Error);
        CHECK_THROWS_AS(make_field(spec, 2), Error);
        CHECK_THROWS_AS(DatumSpec::parse("vortex", 1.0, 1, -2.0), Error);
        spec.amplitude = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(make_field(spec, 8), Error);
    }
}

TEST_CASE("leray projector") {
    SUBCASE("annihilates gradient fields") {
        // coeff(k) = i k q(k) for a random scalar q
        SpectralField g(8);
        detail::NormalSampler normal(3);
        for (int k1 = -2; k1 <= 2; ++k1)
            for (int k2 = -2; k2 <= 2; ++k2)
                for (int k3 = -2; k3 <= 2; ++k3) {
                    if (k1 == 0 && k2 == 0 && k3 == 0) continue;
                    const Complex q(normal(), normal());
                    g.set_coeff(k1, k2, k3,
                                {Complex(0, 1) * double(k1) * q, Complex(0, 1) * double(k2) * q,
                                 Complex(0, 1) * double(k3) * q});
                }
        enforce_symmetry(g);
        const SpectralField p = leray_project(g);
        CHECK(test::max_coeff_magnitude(p) <= 1e-14 * test::max_coeff_magnitude(g));
    }
    SUBCASE("identity on solenoidal fields (idempotent)") {
        const SpectralField f = test::random_divfree_field(8, 11);
        const SpectralField p = leray_project(f);
        CHECK(test::max_coeff_distance(f, p) <= 1e-15);
        const SpectralField pp = leray_project(p);
        CHECK(test::max_coeff_distance(p, pp) <= 1e-15);
    }
    SUBCASE("hand value at k=(1,0,0)") {
        SpectralField f(8);
        f.set_coeff(1, 0, 0, {Complex(1, 0), Complex(1, 0), Complex(0, 0)});
        f.set_coeff(-1, 0, 0, {Complex(1, 0), Complex(1, 0), Complex(0, 0)});
        const SpectralField p = leray_project(f);
        const Vec3c c = p.coeff(1, 0, 0);
        CHECK(c[0] == Complex(0, 0));
        CHECK(c[1] == Complex(1, 0));
        CHECK(c[2] == Complex(0, 0));
    }
    SUBCASE("self-adjoint under the spectral inner product") {
        SpectralField f = test::random_divfree_field(8, 21);
        SpectralField g = test::random_divfree_field(8, 22);
        // break solenoidality to make the test non-trivial
        f.set_coeff(1, 1, 0, {Complex(0.3, 0.1), Complex(0.2, -0.4), Complex(0.1, 0.2)});
        f.set_coeff(-1, -1, 0, {Complex(0.3, -0.1), Complex(0.2, 0.4), Complex(0.1, -0.2)});
        g.set_coeff(2, 0, 1, {Complex(-0.2, 0.5), Complex(0.0, 0.1), Complex(0.7, 0.0)});
        g.set_coeff(-2, 0, -1, {Complex(-0.2, -0.5), Complex(0.0, -0.1), Complex(0.7, 0.0)});
        const double a = inner_product(leray_project(f), g);
        const double b = inner_product(f, leray_project(g));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("mollifier") {
    SUBCASE("zero field fixed") {
        const SpectralField z = preset(DatumSpec::Kind::zero, 1.0, 8);
        CHECK(l2_norm_squared(mollify(z, 3)) == 0.0);
    }
    SUBCASE("multiplier tends to 1 monotonically in m") {
        const SpectralField f = preset(DatumSpec::Kind::kolmogorov, 1.0, 8);
        double prev = 0.0;
        for (double m : {1.0, 2.0, 4.0, 16.0, 256.0}) {
            const double r = std::abs(mollify(f, m).coeff(0, 1, 0)[0] / f.coeff(0, 1, 0)[0]);
            CHECK(r > prev);
            CHECK(r <= 1.0);
            prev = r;
        }
        CHECK(prev == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("L2 contraction") {
        const SpectralField f = test::random_divfree_field(16, 5);
        CHECK(l2_norm_squared(mollify(f, 2)) <= l2_norm_squared(f));
    }
    SUBCASE("commutes with projector and Laplacian") {
        SpectralField f = test::random_divfree_field(8, 9);
        f.set_coeff(1, 2, 0, {Complex(0.4, 0.0), Complex(0.1, 0.2), Complex(0.0, 0.3)});
        f.set_coeff(-1, -2, 0, {Complex(0.4, 0.0), Complex(0.1, -0.2), Complex(0.0, -0.3)});
        CHECK(test::max_coeff_distance(mollify(leray_project(f), 2), leray_project(mollify(f, 2))) <=
              1e-15);
        CHECK(test::max_coeff_distance(mollify(laplacian(f), 2), laplacian(mollify(f, 2))) <=
              1e-13);
    }
    SUBCASE("index below 1 rejected") { CHECK_THROWS_AS(mollify(SpectralField(8), 0.5), Error); }
}

TEST_CASE("norms") {
    SUBCASE("kolmogorov closed form") {
        const SpectralField f = preset(DatumSpec::Kind::kolmogorov, 1.0, 8);
        const NormBundle b = norms(f);
        const double expect = std::sqrt(box_volume / 2.0); // 11.1367...
        CHECK(b.l2 == doctest::Approx(expect).epsilon(1e-13));
        CHECK(b.dirichlet == doctest::Approx(expect).epsilon(1e-13));
        CHECK(b.laplacian_l2 == doctest::Approx(expect).epsilon(1e-13));
        CHECK(b.d2_l2 == b.laplacian_l2);
        CHECK(b.sup == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(b.sup_l1 == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("zero field") {
        const NormBundle b = norms(preset(DatumSpec::Kind::zero, 1.0, 8));
        CHECK(b.l2 == 0.0);
        CHECK(b.dirichlet == 0.0);
        CHECK(b.sup == 0.0);
    }
    SUBCASE("Parseval against physical quadrature") {
        const SpectralField f = test::random_divfree_field(8, 13);
        const double spectral = l2_norm_squared(f);
        const double physical = test::physical_l2_squared_oracle(f);
        CHECK(physical == doctest::Approx(spectral).epsilon(1e-12));
    }
    SUBCASE("interpolation inequality dirichlet^2 <= l2 * laplacian_l2") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const NormBundle b = norms(test::random_divfree_field(8, seed));
            CHECK(b.dirichlet * b.dirichlet <= b.l2 * b.laplacian_l2 * (1.0 + 1e-12));
        }
    }
    SUBCASE("grid sup lower-bounds the l1 sum") {
        for (std::uint64_t seed = 31; seed <= 40; ++seed) {
            const NormBundle b = norms(test::random_divfree_field(8, seed));
            CHECK(b.sup <= b.sup_l1 * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("nonlinear term") {
    SUBCASE("kolmogorov advects itself to zero") {
        const SpectralField f = preset(DatumSpec::Kind::kolmogorov, 1.0, 8);
        CHECK(test::max_coeff_magnitude(nonlinear_term(f, f)) <= 1e-15);
    }
    SUBCASE("zero input") {
        const SpectralField z = preset(DatumSpec::Kind::zero, 1.0, 8);
        const SpectralField f = preset(DatumSpec::Kind::taylor_green, 1.0, 8);
        CHECK(test::max_coeff_magnitude(nonlinear_term(f, z)) == 0.0);
    }
    SUBCASE("taylor-green matches the convolution oracle") {
        const SpectralField f = preset(DatumSpec::Kind::taylor_green, 1.0, 8);
        const SpectralField fast = nonlinear_term(f, f);
        const SpectralField slow = test::convolution_oracle(f, f);
        const double scale = std::max(1.0, test::max_coeff_magnitude(slow));
        CHECK(test::max_coeff_distance(fast, slow) <= 1e-12 * scale);
    }
    SUBCASE("random fields match the oracle, distinct advecting field") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const SpectralField a = test::random_divfree_field(8, seed);
            const SpectralField u = test::random_divfree_field(8, seed + 100);
            const SpectralField fast = nonlinear_term(a, u);
            const SpectralField slow = test::convolution_oracle(a, u);
            const double scale = std::max(1.0, test::max_coeff_magnitude(slow));
            CHECK(test::max_coeff_distance(fast, slow) <= 1e-12 * scale);
        }
    }
    SUBCASE("skew symmetry: (P[(u.grad)u], u) = 0") {
        for (std::uint64_t seed = 51; seed <= 55; ++seed) {
            const SpectralField u = test::random_divfree_field(8, seed, 3.0);
            const SpectralField nl = nonlinear_term(u, u);
            const double ip = inner_product(nl, u);
            const double scale = std::sqrt(l2_norm_squared(nl) * l2_norm_squared(u));
            CHECK(std::abs(ip) <= 1e-11 * std::max(1.0, scale));
        }
    }
    SUBCASE("output invariants hold") {
        const SpectralField a = test::random_divfree_field(8, 61);
        const SpectralField u = test::random_divfree_field(8, 62);
        check_field_invariants(nonlinear_term(a, u));
    }
    SUBCASE("resolution mismatch rejected") {
        CHECK_THROWS_AS(nonlinear_term(SpectralField(8), SpectralField(16)), Error);
    }
}

TEST_CASE("pressure gradient") {
    SUBCASE("kolmogorov advection gives zero") {
        const SpectralField f = preset(DatumSpec::Kind::kolmogorov, 1.0, 8);
        CHECK(test::max_coeff_magnitude(pressure_gradient(f, f)) <= 1e-15);
    }
    SUBCASE("complementary to the projector") {
        const SpectralField a = test::random_divfree_field(8, 71);
        const SpectralField u = test::random_divfree_field(8, 72);
        const SpectralField pg = pressure_gradient(a, u);
        CHECK(test::max_coeff_magnitude(leray_project(pg)) <=
              1e-13 * std::max(1.0, test::max_coeff_magnitude(pg)));
    }
    SUBCASE("taylor-green output is parallel to k per mode") {
        const SpectralField f = preset(DatumSpec::Kind::taylor_green, 1.0, 8);
        const SpectralField pg = pressure_gradient(f, f);
        double worst = 0.0;
        detail::for_each_mode(pg.n, [&](int i, int j, int l, int k1, int k2, int k3) {
            // k x coeff must vanish
            const Complex c0 = pg.at(0, i, j, l), c1 = pg.at(1, i, j, l), c2 = pg.at(2, i, j, l);
            worst = std::max(worst, std::abs(double(k2) * c2 - double(k3) * c1));
            worst = std::max(worst, std::abs(double(k3) * c0 - double(k1) * c2));
            worst = std::max(worst, std::abs(double(k1) * c1 - double(k2) * c0));
        });
        CHECK(worst <= 1e-13 * std::max(1.0, test::max_coeff_magnitude(pg)));
        CHECK(test::max_coeff_magnitude(pg) > 1e-3); // non-trivial pressure for TG
    }
}

TEST_CASE("resample preserves norms under padding") {
    const SpectralField f = test::random_divfree_field(8, 81);
    const SpectralField up = resample(f, 16);
    CHECK(l2_norm_squared(up) == doctest::Approx(l2_norm_squared(f)).epsilon(1e-14));
    const NormBundle a = norms(f), b = norms(up);
    CHECK(a.dirichlet == doctest::Approx(b.dirichlet).epsilon(1e-13));
    CHECK(a.laplacian_l2 == doctest::Approx(b.laplacian_l2).epsilon(1e-13));
    const SpectralField back = resample(up, 8);
    CHECK(test::max_coeff_distance(f, back) == 0.0);
}
