#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rlab/rational.hpp"

namespace rlab {

using cplx = std::complex<double>;

// Uniform cubic grid covering [-L, L)^d with n samples per axis. The
// half-width is stored as an exact rational times an optional factor of pi:
// the dual grid of [-L, L) has half-width pi*n/(2L), so closing the family
// under duality needs exactly one power of pi. Keeping the rational exact
// makes dual().dual() reproduce the original spec bit for bit.
struct GridSpec {
    int d = 3;
    int n = 16;
    Rational box = Rational(1);  // L = box * pi^pi_pow
    int pi_pow = 0;

    GridSpec() = default;
    GridSpec(int d_, const Rational& box_, int n_, int pi_pow_ = 0)
        : d(d_), n(n_), box(box_), pi_pow(pi_pow_) {
        if (d != 2 && d != 3) throw std::invalid_argument("grid: d must be 2 or 3");
        if (n < 16 || n % 2 != 0) throw std::invalid_argument("grid: n must be even and >= 16");
        if (!(box > Rational(0))) throw std::invalid_argument("grid: box half-width must be positive");
        if (pi_pow != 0 && pi_pow != 1) throw std::invalid_argument("grid: pi_pow must be 0 or 1");
    }

    double L() const { return box.to_double() * (pi_pow ? M_PI : 1.0); }
    double h() const { return 2.0 * L() / n; }
    double dual_spacing() const { return M_PI / L(); }

    GridSpec dual() const { return GridSpec(d, Rational(n, 2) / box, n, 1 - pi_pow); }

    // coordinate of index j along any axis
    double coord(int j) const { return -L() + j * h(); }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
        return s;
    }

    bool operator==(const GridSpec& o) const {
        return d == o.d && n == o.n && box == o.box && pi_pow == o.pi_pow;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Complex samples on a GridSpec in row-major order (last axis fastest).
struct GridFn {
    GridSpec spec;
    std::vector<cplx> values;

    GridFn() = default;
    explicit GridFn(const GridSpec& s) : spec(s), values(s.size(), cplx(0.0, 0.0)) {}
    GridFn(const GridSpec& s, std::vector<cplx> v) : spec(s), values(std::move(v)) {
        if (values.size() != s.size())
            throw std::invalid_argument("grid fn: value count does not match spec");
    }

    std::size_t flat(int i0, int i1) const {
        return static_cast<std::size_t>(i0) * spec.n + i1;
    }
    std::size_t flat(int i0, int i1, int i2) const {
        return (static_cast<std::size_t>(i0) * spec.n + i1) * spec.n + i2;
    }

    cplx& at(int i0, int i1) { return values[flat(i0, i1)]; }
    cplx& at(int i0, int i1, int i2) { return values[flat(i0, i1, i2)]; }
    const cplx& at(int i0, int i1) const { return values[flat(i0, i1)]; }
    const cplx& at(int i0, int i1, int i2) const { return values[flat(i0, i1, i2)]; }
};

// Fill a grid function from a callable taking the node coordinates.
template <typename F2>
GridFn make_grid_fn_2d(const GridSpec& spec, F2&& f) {
    if (spec.d != 2) throw std::invalid_argument("make_grid_fn_2d: spec is not 2-d");
    GridFn g(spec);
    for (int i = 0; i < spec.n; ++i) {
        double x = spec.coord(i);
        for (int j = 0; j < spec.n; ++j) g.at(i, j) = f(x, spec.coord(j));
    }
    return g;
}

template <typename F3>
GridFn make_grid_fn_3d(const GridSpec& spec, F3&& f) {
    if (spec.d != 3) throw std::invalid_argument("make_grid_fn_3d: spec is not 3-d");
    GridFn g(spec);
    for (int i = 0; i < spec.n; ++i) {
        double x = spec.coord(i);
        for (int j = 0; j < spec.n; ++j) {
            double y = spec.coord(j);
            for (int k = 0; k < spec.n; ++k) g.at(i, j, k) = f(x, y, spec.coord(k));
        }
    }
    return g;
}

// Radial helper usable in either dimension.
template <typename FR>
GridFn make_radial_fn(const GridSpec& spec, FR&& f) {
    if (spec.d == 2)
        return make_grid_fn_2d(spec, [&](double x, double y) { return f(std::sqrt(x * x + y * y)); });
    return make_grid_fn_3d(spec, [&](double x, double y, double z) {
        return f(std::sqrt(x * x + y * y + z * z));
    });
}

// Finite strictly decreasing list of scales standing in for a supremum over
// epsilon > 0. Bounds against a grid: resolvable above the spacing, below
// half the box.
struct ScaleLadder {
    std::vector<double> scales;

    ScaleLadder() = default;
    explicit ScaleLadder(std::vector<double> s) : scales(std::move(s)) {
        if (scales.empty()) throw std::invalid_argument("ladder: empty");
        for (std::size_t i = 0; i < scales.size(); ++i) {
            if (!(scales[i] > 0.0)) throw std::invalid_argument("ladder: scales must be positive");
            if (i > 0 && !(scales[i] < scales[i - 1]))
                throw std::invalid_argument("ladder: scales must be strictly decreasing");
        }
    }

    double min() const { return scales.back(); }
    double max() const { return scales.front(); }

    void check_bounds(const GridSpec& spec) const {
        if (min() < spec.h() * (1.0 - 1e-12))
            throw std::invalid_argument("ladder: smallest scale below grid spacing");
        if (max() > spec.L() / 2.0 * (1.0 + 1e-12))
            throw std::invalid_argument("ladder: largest scale above half box width");
    }

    ScaleLadder truncated_to_largest(std::size_t count) const {
        std::vector<double> s(scales.begin(),
                              scales.begin() + std::min(count, scales.size()));
        return ScaleLadder(std::move(s));
    }
};

// Half-dyadic ladder {2^{k/2}} intersected with [lo, hi], descending.
inline ScaleLadder half_dyadic_ladder(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("ladder: bad range");
    int kmin = static_cast<int>(std::ceil(2.0 * std::log2(lo) - 1e-9));
    int kmax = static_cast<int>(std::floor(2.0 * std::log2(hi) + 1e-9));
    std::vector<double> s;
    for (int k = kmax; k >= kmin; --k) s.push_back(std::pow(2.0, 0.5 * k));
    return ScaleLadder(std::move(s));
}

inline ScaleLadder default_ladder(const GridSpec& spec) {
    auto lad = half_dyadic_ladder(spec.h(), spec.L() / 2.0);
    lad.check_bounds(spec);
    return lad;
}

// Geometric ladder from hi down to lo with the given number of rungs per
// octave (used by tests that need denser coverage than half-dyadic).
inline ScaleLadder geometric_ladder(double lo, double hi, int per_octave) {
    if (!(lo > 0.0) || !(hi > lo) || per_octave < 1)
        throw std::invalid_argument("ladder: bad geometric parameters");
    int steps = static_cast<int>(std::floor(per_octave * std::log2(hi / lo) + 1e-9));
    std::vector<double> s;
    for (int k = 0; k <= steps; ++k)
        s.push_back(hi * std::pow(2.0, -static_cast<double>(k) / per_octave));
    return ScaleLadder(std::move(s));
}

} // namespace rlab
