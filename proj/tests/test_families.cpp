#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rlab/families.hpp"
#include "rlab/grid_ops.hpp"
#include "rlab/sphere.hpp"

using namespace rlab;

TEST_CASE("gaussian family has the closed-form mass") {
    GridSpec spec(3, Rational(8), 64, 0);
    auto fam = gaussian_family(spec, {0.5, 1.0});
    REQUIRE(fam.size() == 2);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        double w = i == 0 ? 0.5 : 1.0;
        double mass = lp_norm(fam[i], Rational(1));
        double ref = std::pow(w * std::sqrt(2.0 * M_PI), 3);
        CHECK(mass == Catch::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("modulated family shifts the transform without changing the modulus") {
    GridSpec spec(2, Rational(6), 64, 0);
    auto plain = gaussian_family(spec, {0.7});
    auto mod = modulated_family(spec, {0.7}, {0.5, 0.0});
    REQUIRE(mod.size() == 1);
    double diff = 0.0;
    for (std::size_t i = 0; i < mod[0].values.size(); ++i)
        diff = std::max(diff, std::abs(std::abs(mod[0].values[i]) - plain[0].values[i].real()));
    CHECK(diff < 1e-12);
}

TEST_CASE("polar cap mass matches the spherical formula") {
    double delta = 0.5;
    auto rule = sphere_rule(4096, 16);
    SphereFn cap = knapp_cap(rule, delta);
    double mass = lq_norm_sigma(cap, Rational(1));
    double ref = 2.0 * M_PI * (1.0 - std::cos(delta));
    CHECK(mass == Catch::Approx(ref).epsilon(1e-2));
    CHECK(lq_norm_sigma(cap, Rational::infinity()) == 1.0);
}

TEST_CASE("cap aperture is validated") {
    auto rule = sphere_rule(24, 48);
    CHECK_THROWS_AS(knapp_cap(rule, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(knapp_cap(rule, 4.0), std::invalid_argument);
}

TEST_CASE("random bumps are reproducible and seed sensitive") {
    GridSpec spec(3, Rational(8), 32, 0);
    auto a = random_bump_family(spec, 2, 42);
    auto b = random_bump_family(spec, 2, 42);
    auto c = random_bump_family(spec, 2, 43);
    REQUIRE(a.size() == 2);
    REQUIRE(a[0].values == b[0].values);
    REQUIRE(a[1].values == b[1].values);
    CHECK(a[0].values != c[0].values);
}

TEST_CASE("family dispatch rejects unknown names") {
    GridSpec spec(2, Rational(4), 32, 0);
    FamilySpec fam;
    fam.name = "unknown";
    CHECK_THROWS_WITH(make_family(fam, spec), Catch::Matchers::ContainsSubstring("unknown family"));
}

TEST_CASE("nonpositive widths are rejected") {
    GridSpec spec(2, Rational(4), 32, 0);
    CHECK_THROWS_AS(gaussian_family(spec, {0.5, -1.0}), std::invalid_argument);
}
