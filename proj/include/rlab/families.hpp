#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlab/grid.hpp"
#include "rlab/grid_ops.hpp"
#include "rlab/sphere.hpp"

namespace rlab {

namespace detail {

// Raw-bit uniforms so the draw sequence does not depend on the standard
// library's distribution implementations.
class SeededUniform {
public:
    explicit SeededUniform(std::uint64_t seed) : eng_(seed) {}
    double u01() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }
    double sym() { return 2.0 * u01() - 1.0; }

private:
    std::mt19937_64 eng_;
};

} // namespace detail

// Dilation family exp(-|x/w|^2 / 2), one member per width, widths descending.
inline std::vector<GridFn> gaussian_family(const GridSpec& spec, const std::vector<double>& widths) {
    std::vector<GridFn> out;
    for (double w : widths) {
        if (!(w > 0.0)) throw std::invalid_argument("gaussian family: width must be positive");
        out.push_back(make_radial_fn(spec, [w](double r) { return std::exp(-0.5 * r * r / (w * w)); }));
    }
    return out;
}

// The same dilations carried to frequency v by a plane-wave factor.
inline std::vector<GridFn> modulated_family(const GridSpec& spec, const std::vector<double>& widths,
                                            const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != spec.d)
        throw std::invalid_argument("modulated family: frequency dimension mismatch");
    std::vector<GridFn> out;
    for (const GridFn& f : gaussian_family(spec, widths)) out.push_back(modulate(f, v));
    return out;
}

// Indicator of the polar cap {omega . e_d >= cos(delta)} on the given rule.
inline SphereFn knapp_cap(const SphereRulePtr& rule, double delta) {
    if (!(delta > 0.0) || !(delta < M_PI))
        throw std::invalid_argument("knapp cap: aperture must lie in (0, pi)");
    double zmin = std::cos(delta);
    SphereFn g(rule);
    int axis = rule->d - 1;
    for (std::size_t k = 0; k < rule->size(); ++k)
        if (rule->nodes[k][axis] >= zmin) g.values[k] = cplx(1.0, 0.0);
    return g;
}

// Sums of two complex Gaussian bumps with seeded widths in [0.4, 0.55],
// centers within 0.6 of the origin, and unit-order amplitudes. Narrow enough
// that autocorrelations stay negligible on the boundary shell of boxes with
// half-width 4 or more.
inline std::vector<GridFn> random_bump_family(const GridSpec& spec, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("random bump family: count must be positive");
    detail::SeededUniform rng(seed);
    std::vector<GridFn> out;
    for (int m = 0; m < count; ++m) {
        struct Bump {
            double w;
            double c[3];
            cplx a;
        };
        std::vector<Bump> bumps(2);
        for (auto& b : bumps) {
            b.w = 0.4 + 0.15 * rng.u01();
            for (int ax = 0; ax < 3; ++ax) b.c[ax] = 0.0;
            for (int ax = 0; ax < spec.d; ++ax) b.c[ax] = 0.6 * rng.sym();
            double re = rng.sym(), im = rng.sym();
            b.a = cplx(re, im);
        }
        auto eval = [&](double x, double y, double z) {
            cplx acc(0.0, 0.0);
            for (const auto& b : bumps) {
                double dx = x - b.c[0], dy = y - b.c[1], dz = z - b.c[2];
                acc += b.a * std::exp(-M_PI * (dx * dx + dy * dy + dz * dz) / (b.w * b.w));
            }
            return acc;
        };
        if (spec.d == 2)
            out.push_back(make_grid_fn_2d(spec, [&](double x, double y) { return eval(x, y, 0.0); }));
        else
            out.push_back(make_grid_fn_3d(spec, eval));
    }
    return out;
}

// String-keyed entry point used by the command-line surface.
struct FamilySpec {
    std::string name;             // gaussian | modulated | random_bumps
    std::vector<double> widths;   // dilation parameters, descending
    std::vector<double> modulation;
    int count = 0;                // random_bumps only
    std::uint64_t seed = 0;
};

inline std::vector<GridFn> make_family(const FamilySpec& fam, const GridSpec& spec) {
    if (fam.name == "gaussian") return gaussian_family(spec, fam.widths);
    if (fam.name == "modulated") return modulated_family(spec, fam.widths, fam.modulation);
    if (fam.name == "random_bumps") return random_bump_family(spec, fam.count, fam.seed);
    throw std::invalid_argument("unknown family: " + fam.name);
}

} // namespace rlab
