#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rlab/fft.hpp"
#include "rlab/grid.hpp"
#include "rlab/rational.hpp"

namespace rlab {

// (sum |f|^p h^d)^{1/p}; p = inf gives the max over nodes.
inline double lp_norm(const GridFn& f, const Rational& p) {
    if (p.is_infinite()) {
        double m = 0.0;
        for (const cplx& z : f.values) m = std::max(m, std::abs(z));
        return m;
    }
    if (p < Rational(1)) throw std::invalid_argument("lp_norm: p must be >= 1");
    double cell = 1.0;
    for (int a = 0; a < f.spec.d; ++a) cell *= f.spec.h();
    double pd = p.to_double();
    double acc = 0.0;
    if (p == Rational(1)) {
        for (const cplx& z : f.values) acc += std::abs(z);
    } else if (p == Rational(2)) {
        for (const cplx& z : f.values) acc += std::norm(z);
    } else {
        for (const cplx& z : f.values) acc += std::pow(std::abs(z), pd);
    }
    return std::pow(acc * cell, 1.0 / pd);
}

inline cplx inner_product(const GridFn& f, const GridFn& g) {
    if (!(f.spec == g.spec)) throw std::invalid_argument("inner_product: mismatched specs");
    double cell = 1.0;
    for (int a = 0; a < f.spec.d; ++a) cell *= f.spec.h();
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        acc += f.values[i] * std::conj(g.values[i]);
    return acc * cell;
}

// Largest |f| over nodes whose sup-norm coordinate reaches 90% of the box.
inline double shell_max(const GridFn& f) {
    const GridSpec& s = f.spec;
    double cut = 0.9 * s.L();
    double m = 0.0;
    if (s.d == 2) {
        for (int i = 0; i < s.n; ++i) {
            bool ei = std::abs(s.coord(i)) >= cut;
            for (int j = 0; j < s.n; ++j)
                if (ei || std::abs(s.coord(j)) >= cut)
                    m = std::max(m, std::abs(f.at(i, j)));
        }
    } else {
        for (int i = 0; i < s.n; ++i) {
            bool ei = std::abs(s.coord(i)) >= cut;
            for (int j = 0; j < s.n; ++j) {
                bool ej = ei || std::abs(s.coord(j)) >= cut;
                for (int k = 0; k < s.n; ++k)
                    if (ej || std::abs(s.coord(k)) >= cut)
                        m = std::max(m, std::abs(f.at(i, j, k)));
            }
        }
    }
    return m;
}

inline double max_abs(const GridFn& f) {
    double m = 0.0;
    for (const cplx& z : f.values) m = std::max(m, std::abs(z));
    return m;
}

namespace detail {

inline void require_decayed(const GridFn& f, const char* who) {
    double peak = max_abs(f);
    if (peak == 0.0) return;
    double shell = shell_max(f);
    if (shell > 1e-9 * peak) {
        std::ostringstream os;
        os << who << ": operand not decayed on the outer shell (relative shell mass "
           << shell / peak << ", threshold 1e-9); enlarge the box";
        throw std::invalid_argument(os.str());
    }
}

} // namespace detail

// Circular convolution scaled by h^d, the grid counterpart of the continuum
// convolution integral. Both operands must be negligible on the outer 10%
// shell so the wraparound is harmless.
inline GridFn convolve(const GridFn& f, const GridFn& g) {
    if (!(f.spec == g.spec)) throw std::invalid_argument("convolve: mismatched specs");
    detail::require_decayed(f, "convolve");
    detail::require_decayed(g, "convolve");
    GridFn F = fourier_transform(f);
    GridFn G = fourier_transform(g);
    for (std::size_t i = 0; i < F.values.size(); ++i) F.values[i] *= G.values[i];
    return inverse_fourier_transform(F);
}

// Samples of eps^{-d} exp(-pi |x/eps|^2). Unit continuum mass; the grid sum
// matches it once eps covers a few cells.
inline GridFn mollifier(const GridSpec& spec, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("mollifier: scale must be positive");
    if (eps < spec.h() * (1.0 - 1e-12))
        throw std::invalid_argument("mollifier: scale below grid spacing");
    if (eps > spec.L() / 2.0 * (1.0 + 1e-12))
        throw std::invalid_argument("mollifier: scale above half box width");
    double amp = std::pow(eps, -spec.d);
    return make_radial_fn(spec, [&](double r) {
        double u = r / eps;
        return cplx(amp * std::exp(-M_PI * u * u), 0.0);
    });
}

// h~(x_j) = conj(h(-x_j)); the grid negation maps index j to (n-j) mod n.
inline GridFn reflect_conjugate(const GridFn& f) {
    const GridSpec& s = f.spec;
    GridFn out(s);
    int n = s.n;
    if (s.d == 2) {
        for (int i = 0; i < n; ++i) {
            int ir = (n - i) % n;
            for (int j = 0; j < n; ++j)
                out.at(i, j) = std::conj(f.at(ir, (n - j) % n));
        }
    } else {
        for (int i = 0; i < n; ++i) {
            int ir = (n - i) % n;
            for (int j = 0; j < n; ++j) {
                int jr = (n - j) % n;
                for (int k = 0; k < n; ++k)
                    out.at(i, j, k) = std::conj(f.at(ir, jr, (n - k) % n));
            }
        }
    }
    return out;
}

// Multiply by exp(i v.x).
inline GridFn modulate(const GridFn& f, const std::vector<double>& v) {
    const GridSpec& s = f.spec;
    if (static_cast<int>(v.size()) != s.d)
        throw std::invalid_argument("modulate: direction dimension mismatch");
    GridFn out(s);
    if (s.d == 2) {
        for (int i = 0; i < s.n; ++i) {
            for (int j = 0; j < s.n; ++j) {
                double ph = v[0] * s.coord(i) + v[1] * s.coord(j);
                out.at(i, j) = f.at(i, j) * cplx(std::cos(ph), std::sin(ph));
            }
        }
    } else {
        for (int i = 0; i < s.n; ++i) {
            for (int j = 0; j < s.n; ++j) {
                double pij = v[0] * s.coord(i) + v[1] * s.coord(j);
                for (int k = 0; k < s.n; ++k) {
                    double ph = pij + v[2] * s.coord(k);
                    out.at(i, j, k) = f.at(i, j, k) * cplx(std::cos(ph), std::sin(ph));
                }
            }
        }
    }
    return out;
}

// Discrete averaging maximal function. For each node the result is the larger
// of |f| at the node and the best ball average over the radius ladder, where
// a ball average divides by the number of grid cells actually inside the
// (edge-clipped) ball. Computed with zero-padded circular convolutions; the
// sample sums and the cell counts ride in one transform as real and
// imaginary parts.
inline GridFn hl_maximal(const GridFn& f, const ScaleLadder& radii) {
    const GridSpec& s = f.spec;
    radii.check_bounds(s);
    int n = s.n;
    double h = s.h();
    int R = static_cast<int>(std::ceil(radii.max() / h - 1e-9));
    int m = n + 2 * R;
    std::size_t msize = 1;
    for (int a = 0; a < s.d; ++a) msize *= static_cast<std::size_t>(m);

    // |f| + i * support indicator, zero-padded
    std::vector<cplx> packed(msize, cplx(0.0, 0.0));
    if (s.d == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                packed[static_cast<std::size_t>(i + R) * m + (j + R)] =
                    cplx(std::abs(f.at(i, j)), 1.0);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    packed[(static_cast<std::size_t>(i + R) * m + (j + R)) * m + (k + R)] =
                        cplx(std::abs(f.at(i, j, k)), 1.0);
    }
    detail::run_dft(packed, s.d, m, FFTW_FORWARD);

    GridFn out(s);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = cplx(std::abs(f.values[i]), 0.0);

    std::vector<cplx> ind(msize), prod(msize);
    for (double r : radii.scales) {
        std::fill(ind.begin(), ind.end(), cplx(0.0, 0.0));
        int Rr = static_cast<int>(std::floor(r / h + 1e-9));
        double r2 = r * r * (1.0 + 1e-12);
        if (s.d == 2) {
            for (int di = -Rr; di <= Rr; ++di)
                for (int dj = -Rr; dj <= Rr; ++dj)
                    if ((di * di + dj * dj) * h * h <= r2)
                        ind[static_cast<std::size_t>((di + m) % m) * m + (dj + m) % m] =
                            cplx(1.0, 0.0);
        } else {
            for (int di = -Rr; di <= Rr; ++di)
                for (int dj = -Rr; dj <= Rr; ++dj)
                    for (int dk = -Rr; dk <= Rr; ++dk)
                        if ((di * di + dj * dj + dk * dk) * h * h <= r2)
                            ind[(static_cast<std::size_t>((di + m) % m) * m + (dj + m) % m) * m +
                                (dk + m) % m] = cplx(1.0, 0.0);
        }
        detail::run_dft(ind, s.d, m, FFTW_FORWARD);
        for (std::size_t i = 0; i < msize; ++i) prod[i] = packed[i] * ind[i];
        detail::run_dft(prod, s.d, m, FFTW_BACKWARD);
        double norm = 1.0 / static_cast<double>(msize);

        if (s.d == 2) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cplx z = prod[static_cast<std::size_t>(i + R) * m + (j + R)] * norm;
                    double cnt = std::round(z.imag());
                    double avg = z.real() / std::max(cnt, 1.0);
                    cplx& cur = out.values[out.flat(i, j)];
                    if (avg > cur.real()) cur = cplx(avg, 0.0);
                }
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) {
                        cplx z = prod[(static_cast<std::size_t>(i + R) * m + (j + R)) * m + (k + R)] * norm;
                        double cnt = std::round(z.imag());
                        double avg = z.real() / std::max(cnt, 1.0);
                        cplx& cur = out.values[out.flat(i, j, k)];
                        if (avg > cur.real()) cur = cplx(avg, 0.0);
                    }
        }
    }
    return out;
}

} // namespace rlab
