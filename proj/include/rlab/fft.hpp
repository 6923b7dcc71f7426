#pragma once

#include <fftw3.h>

#include <stdexcept>
#include <vector>

#include "rlab/grid.hpp"

namespace rlab {

namespace detail {

// Rotate each axis by n/2. For even n this maps the centered index range
// [-n/2, n/2) onto the DFT order [0, n) and is its own inverse.
inline std::vector<cplx> half_shift(const std::vector<cplx>& v, int d, int n) {
    std::vector<cplx> out(v.size());
    int half = n / 2;
    if (d == 2) {
        for (int i = 0; i < n; ++i) {
            int is = (i + half) % n;
            for (int j = 0; j < n; ++j) {
                int js = (j + half) % n;
                out[static_cast<std::size_t>(is) * n + js] = v[static_cast<std::size_t>(i) * n + j];
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            int is = (i + half) % n;
            for (int j = 0; j < n; ++j) {
                int js = (j + half) % n;
                std::size_t rin = (static_cast<std::size_t>(i) * n + j) * n;
                std::size_t rout = (static_cast<std::size_t>(is) * n + js) * n;
                for (int k = 0; k < n; ++k)
                    out[rout + (k + half) % n] = v[rin + k];
            }
        }
    }
    return out;
}

inline void run_dft(std::vector<cplx>& buf, int d, int n, int sign) {
    int dims[3] = {n, n, n};
    fftw_complex* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft(d, dims, p, p, sign, FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("fft: plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

} // namespace detail

// Discrete counterpart of F[f](xi) = integral of f(x) e^{-i x.xi} dx.
// Output lives on the dual grid, samples scaled by h^d so values approximate
// the continuum transform directly.
inline GridFn fourier_transform(const GridFn& f) {
    const GridSpec& s = f.spec;
    std::vector<cplx> buf = detail::half_shift(f.values, s.d, s.n);
    detail::run_dft(buf, s.d, s.n, FFTW_FORWARD);
    buf = detail::half_shift(buf, s.d, s.n);
    double scale = 1.0;
    for (int a = 0; a < s.d; ++a) scale *= s.h();
    for (auto& z : buf) z *= scale;
    return GridFn(s.dual(), std::move(buf));
}

inline GridFn inverse_fourier_transform(const GridFn& F);

enum class FourierDirection { forward, inverse };

inline GridFn fourier_transform(const GridFn& f, FourierDirection dir) {
    return dir == FourierDirection::forward ? fourier_transform(f)
                                            : inverse_fourier_transform(f);
}

// Inverse with the matching normalization (Delta xi / (2 pi))^d, so that
// inverse(fourier_transform(f)) == f up to roundoff.
inline GridFn inverse_fourier_transform(const GridFn& F) {
    const GridSpec& s = F.spec;
    GridSpec out_spec = s.dual();
    std::vector<cplx> buf = detail::half_shift(F.values, s.d, s.n);
    detail::run_dft(buf, s.d, s.n, FFTW_BACKWARD);
    buf = detail::half_shift(buf, s.d, s.n);
    double scale = 1.0;
    for (int a = 0; a < s.d; ++a) scale /= (s.n * out_spec.h());
    for (auto& z : buf) z *= scale;
    return GridFn(out_spec, std::move(buf));
}

} // namespace rlab
