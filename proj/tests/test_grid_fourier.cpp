#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "rlab/fft.hpp"
#include "rlab/grid.hpp"
#include "rlab/grid_ops.hpp"
#include "test_util.hpp"

using namespace rlab;
using testutil::max_abs_diff;
using testutil::random_grid_fn;

namespace {

GridFn gauss_pi(const GridSpec& s) {
    return make_radial_fn(s, [](double r) { return cplx(std::exp(-M_PI * r * r), 0.0); });
}

// Direct O(n^{2d}) evaluation of the scaled transform, the definitional
// oracle for fourier_transform.
GridFn direct_forward(const GridFn& f) {
    const GridSpec& s = f.spec;
    GridSpec dual = s.dual();
    GridFn out(dual);
    double cell = std::pow(s.h(), s.d);
    if (s.d == 2) {
        for (int m0 = 0; m0 < s.n; ++m0)
            for (int m1 = 0; m1 < s.n; ++m1) {
                double xi0 = dual.coord(m0), xi1 = dual.coord(m1);
                cplx acc(0.0, 0.0);
                for (int j0 = 0; j0 < s.n; ++j0)
                    for (int j1 = 0; j1 < s.n; ++j1) {
                        double ph = s.coord(j0) * xi0 + s.coord(j1) * xi1;
                        acc += f.at(j0, j1) * cplx(std::cos(ph), -std::sin(ph));
                    }
                out.at(m0, m1) = acc * cell;
            }
    } else {
        for (int m0 = 0; m0 < s.n; ++m0)
            for (int m1 = 0; m1 < s.n; ++m1)
                for (int m2 = 0; m2 < s.n; ++m2) {
                    double xi0 = dual.coord(m0), xi1 = dual.coord(m1), xi2 = dual.coord(m2);
                    cplx acc(0.0, 0.0);
                    for (int j0 = 0; j0 < s.n; ++j0)
                        for (int j1 = 0; j1 < s.n; ++j1)
                            for (int j2 = 0; j2 < s.n; ++j2) {
                                double ph = s.coord(j0) * xi0 + s.coord(j1) * xi1 + s.coord(j2) * xi2;
                                acc += f.at(j0, j1, j2) * cplx(std::cos(ph), -std::sin(ph));
                            }
                    out.at(m0, m1, m2) = acc * cell;
                }
    }
    return out;
}

} // namespace

TEST_CASE("grid spec geometry and exact duality") {
    GridSpec s(3, Rational(8), 128);
    REQUIRE(s.L() == 8.0);
    REQUIRE(s.h() == 0.125);
    REQUIRE(s.dual_spacing() == Catch::Approx(M_PI / 8.0).epsilon(1e-15));

    GridSpec d = s.dual();
    REQUIRE(d.d == 3);
    REQUIRE(d.n == 128);
    REQUIRE(d.pi_pow == 1);
    // dual box half-width is pi/h = 8 pi
    REQUIRE(d.L() == Catch::Approx(8.0 * M_PI).epsilon(1e-15));
    // dual grid spacing equals pi/L of the original
    REQUIRE(d.h() == Catch::Approx(s.dual_spacing()).epsilon(1e-15));

    // round trip is exact, not merely close
    REQUIRE(d.dual() == s);
    GridSpec odd(2, Rational(17, 3), 48);
    REQUIRE(odd.dual().dual() == odd);

    REQUIRE(s.coord(0) == -8.0);
    REQUIRE(s.coord(64) == 0.0);

    REQUIRE_THROWS_AS(GridSpec(4, Rational(1), 32), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec(3, Rational(1), 33), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec(3, Rational(1), 8), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec(3, Rational(-1), 32), std::invalid_argument);
    REQUIRE_THROWS_AS(GridSpec(3, Rational(1), 32, 2), std::invalid_argument);
}

TEST_CASE("scale ladders validate and generate") {
    GridSpec s(2, Rational(8), 128);
    ScaleLadder lad = default_ladder(s);
    REQUIRE(lad.max() == Catch::Approx(4.0));
    REQUIRE(lad.min() == Catch::Approx(s.h()));
    for (std::size_t i = 1; i < lad.scales.size(); ++i)
        REQUIRE(lad.scales[i] < lad.scales[i - 1]);
    // half-dyadic from 2^{-3} up to 2^2 has 11 rungs
    REQUIRE(lad.scales.size() == 11);

    ScaleLadder g = geometric_ladder(0.25, 2.0, 4);
    REQUIRE(g.scales.size() == 13);
    REQUIRE(g.max() == Catch::Approx(2.0));
    REQUIRE(g.min() == Catch::Approx(0.25));

    ScaleLadder top = lad.truncated_to_largest(3);
    REQUIRE(top.scales.size() == 3);
    REQUIRE(top.max() == lad.max());

    REQUIRE_THROWS_AS(ScaleLadder(std::vector<double>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaleLadder({1.0, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaleLadder({1.0, -0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaleLadder({0.5, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaleLadder({8.0, 1.0}).check_bounds(s), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaleLadder({1.0, 0.01}).check_bounds(s), std::invalid_argument);
}

TEST_CASE("forward transform matches direct summation") {
    GridSpec s2(2, Rational(2), 16);
    GridFn f2 = random_grid_fn(s2, 11);
    GridFn F2 = fourier_transform(f2);
    GridFn D2 = direct_forward(f2);
    REQUIRE(F2.spec == s2.dual());
    REQUIRE(max_abs_diff(F2.values, D2.values) < 1e-11);

    GridSpec s3(3, Rational(2), 16);
    GridFn f3 = random_grid_fn(s3, 12);
    GridFn F3 = fourier_transform(f3);
    GridFn D3 = direct_forward(f3);
    REQUIRE(max_abs_diff(F3.values, D3.values) < 1e-10);

    // direction flag dispatch
    GridFn Fd = fourier_transform(f2, FourierDirection::forward);
    REQUIRE(max_abs_diff(Fd.values, F2.values) == 0.0);
}

TEST_CASE("gaussian transform closed form") {
    // d = 2: hat of exp(-pi |x|^2) is exp(-|xi|^2 / (4 pi))
    GridSpec s(2, Rational(8), 128);
    GridFn f = gauss_pi(s);
    GridFn F = fourier_transform(f);
    GridSpec ds = s.dual();
    double worst = 0.0;
    for (int i = 0; i < ds.n; ++i)
        for (int j = 0; j < ds.n; ++j) {
            double xi0 = ds.coord(i), xi1 = ds.coord(j);
            double expect = std::exp(-(xi0 * xi0 + xi1 * xi1) / (4.0 * M_PI));
            worst = std::max(worst, std::abs(F.at(i, j) - cplx(expect, 0.0)));
        }
    REQUIRE(worst < 1e-6);

    // independent slow-sum oracle along the xi_1 = 0 slice
    int jzero = ds.n / 2;
    for (int i = 0; i < ds.n; i += 7) {
        double xi0 = ds.coord(i);
        cplx acc(0.0, 0.0);
        for (int a = 0; a < s.n; ++a)
            for (int b = 0; b < s.n; ++b) {
                double ph = s.coord(a) * xi0;
                acc += f.at(a, b) * cplx(std::cos(ph), -std::sin(ph));
            }
        acc *= s.h() * s.h();
        REQUIRE(std::abs(F.at(i, jzero) - acc) < 1e-10);
    }

    GridSpec s3(3, Rational(6), 64);
    GridFn f3 = gauss_pi(s3);
    GridFn F3 = fourier_transform(f3);
    GridSpec ds3 = s3.dual();
    double worst3 = 0.0;
    for (int i = 0; i < ds3.n; ++i)
        for (int j = 0; j < ds3.n; ++j)
            for (int k = 0; k < ds3.n; ++k) {
                double r2 = ds3.coord(i) * ds3.coord(i) + ds3.coord(j) * ds3.coord(j) +
                            ds3.coord(k) * ds3.coord(k);
                double expect = std::exp(-r2 / (4.0 * M_PI));
                worst3 = std::max(worst3, std::abs(F3.at(i, j, k) - cplx(expect, 0.0)));
            }
    REQUIRE(worst3 < 1e-6);
}

TEST_CASE("zero, round trip, and plancherel") {
    GridSpec s(3, Rational(4), 32);
    GridFn z(s);
    GridFn Z = fourier_transform(z);
    REQUIRE(max_abs(Z) == 0.0);

    GridFn f = random_grid_fn(s, 21);
    GridFn back = inverse_fourier_transform(fourier_transform(f));
    REQUIRE(back.spec == s);
    REQUIRE(max_abs_diff(back.values, f.values) / max_abs(f) < 1e-10);

    GridFn g2 = random_grid_fn(GridSpec(2, Rational(4), 32), 22);
    GridFn back2 = fourier_transform(fourier_transform(g2), FourierDirection::inverse);
    REQUIRE(max_abs_diff(back2.values, g2.values) / max_abs(g2) < 1e-10);

    // Plancherel with the (2 pi)^d factor
    for (int d = 2; d <= 3; ++d) {
        GridSpec sp(d, Rational(4), 32);
        GridFn h = random_grid_fn(sp, 30 + d);
        double lhs = std::pow(lp_norm(fourier_transform(h), Rational(2)), 2);
        double rhs = std::pow(2.0 * M_PI, d) * std::pow(lp_norm(h, Rational(2)), 2);
        REQUIRE(std::abs(lhs - rhs) / rhs < 1e-12);
    }
}

TEST_CASE("lp norms of the unit gaussian") {
    GridSpec s(3, Rational(6), 64);
    GridFn f = gauss_pi(s);
    REQUIRE(lp_norm(f, Rational(1)) == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(lp_norm(f, Rational(2)) == Catch::Approx(std::pow(2.0, -0.75)).margin(1e-6));
    // closed form p^{-d/(2p)}
    REQUIRE(lp_norm(f, Rational(4, 3)) ==
            Catch::Approx(std::pow(4.0 / 3.0, -9.0 / 8.0)).margin(1e-8));
    REQUIRE(lp_norm(f, Rational(4)) == Catch::Approx(std::pow(4.0, -3.0 / 8.0)).margin(1e-8));
    REQUIRE(lp_norm(f, Rational::infinity()) == 1.0);

    GridFn z(s);
    REQUIRE(lp_norm(z, Rational(7, 2)) == 0.0);
    REQUIRE_THROWS_AS(lp_norm(f, Rational(1, 2)), std::invalid_argument);
}

TEST_CASE("convolution semigroup, commutativity, zero") {
    GridSpec s(2, Rational(8), 128);
    GridFn a = mollifier(s, 0.5);
    GridFn b = mollifier(s, 0.375);
    GridFn c = convolve(a, b);
    double sref = std::sqrt(0.5 * 0.5 + 0.375 * 0.375);
    GridFn expect = mollifier(s, sref);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        if (std::abs(c.values[i]) > 1e-12 || std::abs(expect.values[i]) > 1e-12)
            worst = std::max(worst, std::abs(c.values[i] - expect.values[i]));
    }
    REQUIRE(worst < 1e-6);

    GridFn cr = convolve(b, a);
    REQUIRE(max_abs_diff(c.values, cr.values) < 1e-12);

    GridFn z(s);
    GridFn cz = convolve(a, z);
    REQUIRE(max_abs(cz) < 1e-15);

    // larger scales in 3-d keep the factors spectrally resolved at n = 64
    GridSpec s3(3, Rational(6), 64);
    GridFn a3 = mollifier(s3, 1.0);
    GridFn b3 = mollifier(s3, 0.75);
    GridFn c3 = convolve(a3, b3);
    GridFn e3 = mollifier(s3, 1.25);
    double worst3 = 0.0;
    for (std::size_t i = 0; i < c3.values.size(); ++i)
        worst3 = std::max(worst3, std::abs(c3.values[i] - e3.values[i]));
    REQUIRE(worst3 < 1e-6);
}

TEST_CASE("convolution approximate identity at four cells") {
    GridSpec s(2, Rational(4), 1024);
    GridFn f = gauss_pi(s);
    GridFn m = mollifier(s, 4.0 * s.h());
    GridFn c = convolve(f, m);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i)
        worst = std::max(worst, std::abs(c.values[i] - f.values[i]));
    REQUIRE(worst <= 1e-3);
}

TEST_CASE("convolution rejects bad operands") {
    GridSpec s(2, Rational(4), 32);
    GridFn ones(s);
    for (auto& z : ones.values) z = cplx(1.0, 0.0);
    GridFn g = mollifier(s, 0.25);
    REQUIRE_THROWS_AS(convolve(ones, g), std::invalid_argument);
    REQUIRE_THROWS_AS(convolve(g, ones), std::invalid_argument);

    GridFn other(GridSpec(2, Rational(4), 64));
    REQUIRE_THROWS_AS(convolve(g, other), std::invalid_argument);
}

TEST_CASE("mollifier mass, origin value, bounds") {
    GridSpec s(2, Rational(8), 128);
    GridFn m = mollifier(s, 0.5);
    REQUIRE(lp_norm(m, Rational(1)) == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(m.at(s.n / 2, s.n / 2).real() == Catch::Approx(std::pow(0.5, -2)).epsilon(1e-14));

    GridSpec s3(3, Rational(6), 64);
    GridFn m3 = mollifier(s3, 0.5);
    REQUIRE(lp_norm(m3, Rational(1)) == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(m3.at(32, 32, 32).real() == Catch::Approx(8.0).epsilon(1e-14));

    GridFn chi = mollifier(s, 1.0);
    GridFn g = gauss_pi(s);
    REQUIRE(max_abs_diff(chi.values, g.values) < 1e-15);

    REQUIRE_THROWS_AS(mollifier(s, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(mollifier(s, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(mollifier(s, 0.03), std::invalid_argument);
    REQUIRE_THROWS_AS(mollifier(s, 5.0), std::invalid_argument);
}

TEST_CASE("reflect conjugate involution and symmetries") {
    GridSpec s(3, Rational(4), 32);
    GridFn f = random_grid_fn(s, 41);
    GridFn ff = reflect_conjugate(reflect_conjugate(f));
    REQUIRE(max_abs_diff(ff.values, f.values) == 0.0);

    // real even function is a fixed point
    GridFn g = gauss_pi(s);
    GridFn gr = reflect_conjugate(g);
    REQUIRE(max_abs_diff(gr.values, g.values) == 0.0);

    // modulated gaussian with a dual-grid direction: conjugation and
    // reflection cancel
    std::vector<double> v = {2.0 * s.dual_spacing(), 0.0, 0.0};
    GridFn mg = modulate(g, v);
    GridFn mgr = reflect_conjugate(mg);
    REQUIRE(max_abs_diff(mgr.values, mg.values) < 1e-13);

    // transform side: hat of h~ equals conj of hat of h
    GridFn Fr = fourier_transform(reflect_conjugate(f));
    GridFn F = fourier_transform(f);
    for (auto& z : F.values) z = std::conj(z);
    REQUIRE(max_abs_diff(Fr.values, F.values) < 1e-11);
}

TEST_CASE("modulation law on the dual grid") {
    GridSpec s(2, Rational(8), 128);
    GridFn f = random_grid_fn(s, 51);
    std::vector<double> v = {3.0 * s.dual_spacing(), -2.0 * s.dual_spacing()};
    GridFn Fm = fourier_transform(modulate(f, v));
    GridFn F = fourier_transform(f);
    // shifted comparison: hat of the modulated function at xi equals hat f
    // at xi - v, a circular index shift by (3, -2)
    double worst = 0.0;
    int n = s.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx shifted = F.at(((i - 3) % n + n) % n, ((j + 2) % n + n) % n);
            worst = std::max(worst, std::abs(Fm.at(i, j) - shifted));
        }
    REQUIRE(worst / max_abs(F) < 1e-12);
}

namespace {

// brute-force counted-cell maximal function for small grids
GridFn hl_oracle(const GridFn& f, const ScaleLadder& radii) {
    const GridSpec& s = f.spec;
    GridFn out(s);
    int n = s.n;
    double h = s.h();
    if (s.d == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double best = std::abs(f.at(i, j));
                for (double r : radii.scales) {
                    int R = static_cast<int>(std::floor(r / h + 1e-9));
                    double r2 = r * r * (1.0 + 1e-12);
                    double acc = 0.0;
                    long cnt = 0;
                    for (int a = std::max(0, i - R); a <= std::min(n - 1, i + R); ++a)
                        for (int b = std::max(0, j - R); b <= std::min(n - 1, j + R); ++b) {
                            double dx = (a - i) * h, dy = (b - j) * h;
                            if (dx * dx + dy * dy <= r2) {
                                acc += std::abs(f.at(a, b));
                                ++cnt;
                            }
                        }
                    best = std::max(best, acc / cnt);
                }
                out.at(i, j) = cplx(best, 0.0);
            }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double best = std::abs(f.at(i, j, k));
                    for (double r : radii.scales) {
                        int R = static_cast<int>(std::floor(r / h + 1e-9));
                        double r2 = r * r * (1.0 + 1e-12);
                        double acc = 0.0;
                        long cnt = 0;
                        for (int a = std::max(0, i - R); a <= std::min(n - 1, i + R); ++a)
                            for (int b = std::max(0, j - R); b <= std::min(n - 1, j + R); ++b)
                                for (int c = std::max(0, k - R); c <= std::min(n - 1, k + R); ++c) {
                                    double dx = (a - i) * h, dy = (b - j) * h, dz = (c - k) * h;
                                    if (dx * dx + dy * dy + dz * dz <= r2) {
                                        acc += std::abs(f.at(a, b, c));
                                        ++cnt;
                                    }
                                }
                        best = std::max(best, acc / cnt);
                    }
                    out.at(i, j, k) = cplx(best, 0.0);
                }
    }
    return out;
}

} // namespace

TEST_CASE("hl maximal matches brute force and fixed points") {
    GridSpec s(2, Rational(4), 32);
    GridFn f = random_grid_fn(s, 61);
    ScaleLadder lad = default_ladder(s);
    GridFn M = hl_maximal(f, lad);
    GridFn O = hl_oracle(f, lad);
    REQUIRE(max_abs_diff(M.values, O.values) < 1e-11);

    GridSpec s3(3, Rational(2), 16);
    GridFn f3 = random_grid_fn(s3, 62);
    ScaleLadder lad3 = default_ladder(s3);
    GridFn M3 = hl_maximal(f3, lad3);
    GridFn O3 = hl_oracle(f3, lad3);
    REQUIRE(max_abs_diff(M3.values, O3.values) < 1e-11);

    // constant function is an exact fixed point everywhere, corners included
    GridFn c(s);
    for (auto& z : c.values) z = cplx(0.7, 0.0);
    GridFn Mc = hl_maximal(c, lad);
    double worstc = 0.0;
    for (const auto& z : Mc.values) worstc = std::max(worstc, std::abs(z - cplx(0.7, 0.0)));
    REQUIRE(worstc < 1e-11);

    // indicator of the unit ball averages to one at the origin
    GridFn ind = make_radial_fn(s, [](double r) { return cplx(r <= 1.0 ? 1.0 : 0.0, 0.0); });
    GridFn Mi = hl_maximal(ind, ScaleLadder({1.0, 0.5}));
    REQUIRE(Mi.at(16, 16).real() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hl maximal pointwise properties") {
    GridSpec s(2, Rational(4), 32);
    ScaleLadder lad = default_ladder(s);
    GridFn f = random_grid_fn(s, 71);
    GridFn g = random_grid_fn(s, 72);
    GridFn M_f = hl_maximal(f, lad);
    GridFn M_g = hl_maximal(g, lad);

    // dominates the sampled function
    for (std::size_t i = 0; i < f.values.size(); ++i)
        REQUIRE(M_f.values[i].real() >= std::abs(f.values[i]) - 1e-12);

    // sublinear node by node
    GridFn sum(s);
    for (std::size_t i = 0; i < sum.values.size(); ++i)
        sum.values[i] = f.values[i] + g.values[i];
    GridFn M_sum = hl_maximal(sum, lad);
    for (std::size_t i = 0; i < sum.values.size(); ++i)
        REQUIRE(M_sum.values[i].real() <= M_f.values[i].real() + M_g.values[i].real() + 1e-11);

    // iterating never loses height
    GridFn MM = hl_maximal(M_f, lad);
    for (std::size_t i = 0; i < MM.values.size(); ++i)
        REQUIRE(MM.values[i].real() >= M_f.values[i].real() - 1e-12);
}

TEST_CASE("hl maximal gaussian against dense ladder oracle") {
    GridSpec s(2, Rational(8), 128);
    GridFn f = gauss_pi(s);
    // eighth-octave base ladder against a 10x denser one over the same range
    GridFn M = hl_maximal(f, geometric_ladder(s.h(), s.L() / 2.0, 8));
    ScaleLadder dense = geometric_ladder(s.h(), s.L() / 2.0, 80);
    GridFn Md = hl_maximal(f, dense);
    // node at x = (2, 0)
    int i = s.n / 2 + static_cast<int>(std::round(2.0 / s.h()));
    int j = s.n / 2;
    double coarse = M.at(i, j).real();
    double fine = Md.at(i, j).real();
    REQUIRE(std::abs(coarse / fine - 1.0) < 0.02);
}

TEST_CASE("shell max sees only the outer shell") {
    GridSpec s(2, Rational(4), 32);
    GridFn f(s);
    f.at(16, 16) = cplx(5.0, 0.0);
    REQUIRE(shell_max(f) == 0.0);
    f.at(0, 16) = cplx(0.25, 0.0);
    REQUIRE(shell_max(f) == 0.25);
}
