#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rlab/fft.hpp"
#include "rlab/grid.hpp"
#include "rlab/grid_ops.hpp"
#include "rlab/sphere.hpp"

namespace rlab {

// Node-dependent window scale drawn from a ladder; at most 8 distinct values
// so pair-precomputation stays bounded. eps = 0 is the no-window limit.
struct ScaleAssignment {
    SphereRulePtr rule;
    std::vector<double> eps;

    ScaleAssignment(SphereRulePtr r, std::vector<double> e)
        : rule(std::move(r)), eps(std::move(e)) {
        if (eps.size() != rule->size())
            throw std::invalid_argument("scale assignment: length does not match rule");
        std::vector<double> distinct;
        for (double v : eps) {
            if (v < 0.0) throw std::invalid_argument("scale assignment: negative scale");
            bool seen = false;
            for (double d : distinct)
                if (d == v) { seen = true; break; }
            if (!seen) distinct.push_back(v);
        }
        if (distinct.size() > 8)
            throw std::invalid_argument("scale assignment: more than 8 distinct scales");
    }

    static ScaleAssignment constant(SphereRulePtr r, double e) {
        std::vector<double> v(r->size(), e);
        return ScaleAssignment(std::move(r), std::move(v));
    }

    // cycles the given scales over nodes by index
    static ScaleAssignment cycle(SphereRulePtr r, const std::vector<double>& scales) {
        if (scales.empty()) throw std::invalid_argument("scale assignment: no scales");
        std::vector<double> v(r->size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = scales[k % scales.size()];
        return ScaleAssignment(std::move(r), std::move(v));
    }

    std::vector<double> distinct_scales() const {
        std::vector<double> d;
        for (double v : eps) {
            bool seen = false;
            for (double x : d)
                if (x == v) { seen = true; break; }
            if (!seen) d.push_back(v);
        }
        std::sort(d.begin(), d.end());
        return d;
    }
};

// Filled by operators that integrate over the grid box: if the input is not
// negligible on the outer shell the result is truncated, which is reported
// rather than rejected.
struct TruncationReport {
    bool truncated = false;
    double relative_shell_mass = 0.0;
};

namespace detail {

inline void note_truncation(const GridFn& f, TruncationReport* rep) {
    double peak = max_abs(f);
    double rel = peak > 0.0 ? shell_max(f) / peak : 0.0;
    if (rep) {
        rep->relative_shell_mass = std::max(rep->relative_shell_mass, rel);
        rep->truncated = rep->truncated || rel > 1e-9;
    }
}

inline void require_sphere_in_dual_box(const GridSpec& spec) {
    if (!(M_PI / spec.h() > 1.0))
        throw std::invalid_argument("restriction: unit sphere outside the dual grid box");
}

// per-axis window samples exp(-e^2 x_j^2 / (4 pi)); all ones for e = 0
inline std::vector<double> window_axis(const GridSpec& spec, double e) {
    std::vector<double> w(spec.n, 1.0);
    if (e > 0.0) {
        double c = e * e / (4.0 * M_PI);
        for (int j = 0; j < spec.n; ++j) {
            double x = spec.coord(j);
            w[j] = std::exp(-c * x * x);
        }
    }
    return w;
}

inline std::vector<cplx> phase_axis(const GridSpec& spec, double t, double sign) {
    std::vector<cplx> p(spec.n);
    for (int j = 0; j < spec.n; ++j) p[j] = std::polar(1.0, sign * spec.coord(j) * t);
    return p;
}

// Windowed nonuniform transform: out[k] = sum_j f(x_j) W(eps_k |x_j|)
// e^{-i x_j . omega_k} h^d for the nodes selected per distinct scale.
// Rings of constant polar angle share their x2-contraction.
inline std::vector<cplx> windowed_nudft(const GridFn& f, const SphereRule& rule,
                                        const std::vector<double>& eps) {
    const GridSpec& s = f.spec;
    int n = s.n;
    double cell = std::pow(s.h(), s.d);
    std::vector<cplx> out(rule.size(), cplx(0.0, 0.0));

    std::vector<double> distinct;
    for (double v : eps) {
        bool seen = false;
        for (double d : distinct)
            if (d == v) { seen = true; break; }
        if (!seen) distinct.push_back(v);
    }

    for (double e : distinct) {
        std::vector<double> w = window_axis(s, e);
        if (s.d == 2) {
            std::vector<cplx> inner(n);
            for (std::size_t k = 0; k < rule.size(); ++k) {
                if (eps[k] != e) continue;
                std::vector<cplx> p0 = phase_axis(s, rule.nodes[k][0], -1.0);
                std::vector<cplx> p1 = phase_axis(s, rule.nodes[k][1], -1.0);
                for (int i = 0; i < n; ++i) {
                    cplx acc(0.0, 0.0);
                    for (int j = 0; j < n; ++j) acc += f.at(i, j) * (w[j] * p1[j]);
                    inner[i] = acc;
                }
                cplx acc(0.0, 0.0);
                for (int i = 0; i < n; ++i) acc += inner[i] * (w[i] * p0[i]);
                out[k] = acc * cell;
            }
        } else if (!rule.rings.empty()) {
            std::vector<cplx> C(static_cast<std::size_t>(n) * n);
            std::vector<cplx> inner(n);
            for (const auto& ring : rule.rings) {
                bool any = false;
                for (std::size_t k = ring.start; k < ring.start + ring.count; ++k)
                    if (eps[k] == e) { any = true; break; }
                if (!any) continue;

                // contract the x2 axis against the ring's shared z
                std::vector<cplx> pz(n);
                for (int j = 0; j < n; ++j)
                    pz[j] = w[j] * std::polar(1.0, -s.coord(j) * ring.z);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        cplx acc(0.0, 0.0);
                        const cplx* row = &f.values[(static_cast<std::size_t>(i) * n + j) * n];
                        for (int l = 0; l < n; ++l) acc += row[l] * pz[l];
                        C[static_cast<std::size_t>(i) * n + j] = acc;
                    }

                for (std::size_t k = ring.start; k < ring.start + ring.count; ++k) {
                    if (eps[k] != e) continue;
                    std::vector<cplx> p0 = phase_axis(s, rule.nodes[k][0], -1.0);
                    std::vector<cplx> p1 = phase_axis(s, rule.nodes[k][1], -1.0);
                    for (int i = 0; i < n; ++i) {
                        cplx acc(0.0, 0.0);
                        const cplx* row = &C[static_cast<std::size_t>(i) * n];
                        for (int j = 0; j < n; ++j) acc += row[j] * (w[j] * p1[j]);
                        inner[i] = acc;
                    }
                    cplx acc(0.0, 0.0);
                    for (int i = 0; i < n; ++i) acc += inner[i] * (w[i] * p0[i]);
                    out[k] = acc * cell;
                }
            }
        } else {
            // ringless 3-d rule: contract axis by axis per node
            std::vector<cplx> C(static_cast<std::size_t>(n) * n);
            std::vector<cplx> inner(n);
            for (std::size_t k = 0; k < rule.size(); ++k) {
                if (eps[k] != e) continue;
                std::vector<cplx> p2 = phase_axis(s, rule.nodes[k][2], -1.0);
                for (int j = 0; j < n; ++j) p2[j] *= w[j];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        cplx acc(0.0, 0.0);
                        const cplx* row = &f.values[(static_cast<std::size_t>(i) * n + j) * n];
                        for (int l = 0; l < n; ++l) acc += row[l] * p2[l];
                        C[static_cast<std::size_t>(i) * n + j] = acc;
                    }
                std::vector<cplx> p1 = phase_axis(s, rule.nodes[k][1], -1.0);
                for (int i = 0; i < n; ++i) {
                    cplx acc(0.0, 0.0);
                    const cplx* row = &C[static_cast<std::size_t>(i) * n];
                    for (int j = 0; j < n; ++j) acc += row[j] * (w[j] * p1[j]);
                    inner[i] = acc;
                }
                std::vector<cplx> p0 = phase_axis(s, rule.nodes[k][0], -1.0);
                cplx acc(0.0, 0.0);
                for (int i = 0; i < n; ++i) acc += inner[i] * (w[i] * p0[i]);
                out[k] = acc * cell;
            }
        }
    }
    return out;
}

} // namespace detail

// Fourier restriction to the sphere: direct nonuniform sums, not tied to the
// dual lattice.
inline SphereFn restrict_sphere(const GridFn& f, const SphereRulePtr& rule,
                                TruncationReport* rep = nullptr) {
    detail::require_sphere_in_dual_box(f.spec);
    detail::note_truncation(f, rep);
    std::vector<double> eps(rule->size(), 0.0);
    return SphereFn(rule, detail::windowed_nudft(f, *rule, eps));
}

// Extension operator at arbitrary points: sum_k w_k g(omega_k) e^{-i x.omega_k}.
inline std::vector<cplx> extend_points(const SphereFn& g,
                                       const std::vector<std::array<double, 3>>& points) {
    const SphereRule& rule = *g.rule;
    std::vector<cplx> out(points.size(), cplx(0.0, 0.0));
    for (std::size_t p = 0; p < points.size(); ++p) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            double ph = points[p][0] * rule.nodes[k][0] + points[p][1] * rule.nodes[k][1] +
                        points[p][2] * rule.nodes[k][2];
            acc += rule.weights[k] * g.values[k] * cplx(std::cos(ph), -std::sin(ph));
        }
        out[p] = acc;
    }
    return out;
}

// Extension sampled on a whole grid, factored over rings where possible.
inline GridFn extend_grid(const SphereFn& g, const GridSpec& spec) {
    const SphereRule& rule = *g.rule;
    GridFn out(spec);
    int n = spec.n;
    if (spec.d == 2) {
        for (std::size_t k = 0; k < rule.size(); ++k) {
            cplx wg = rule.weights[k] * g.values[k];
            if (wg == cplx(0.0, 0.0)) continue;
            std::vector<cplx> p0 = detail::phase_axis(spec, rule.nodes[k][0], -1.0);
            std::vector<cplx> p1 = detail::phase_axis(spec, rule.nodes[k][1], -1.0);
            for (int i = 0; i < n; ++i) {
                cplx a = wg * p0[i];
                cplx* row = &out.values[static_cast<std::size_t>(i) * n];
                for (int j = 0; j < n; ++j) row[j] += a * p1[j];
            }
        }
        return out;
    }
    if (!rule.rings.empty()) {
        std::vector<cplx> P(static_cast<std::size_t>(n) * n);
        for (const auto& ring : rule.rings) {
            std::fill(P.begin(), P.end(), cplx(0.0, 0.0));
            bool any = false;
            for (std::size_t k = ring.start; k < ring.start + ring.count; ++k) {
                cplx wg = rule.weights[k] * g.values[k];
                if (wg == cplx(0.0, 0.0)) continue;
                any = true;
                std::vector<cplx> p0 = detail::phase_axis(spec, rule.nodes[k][0], -1.0);
                std::vector<cplx> p1 = detail::phase_axis(spec, rule.nodes[k][1], -1.0);
                for (int i = 0; i < n; ++i) {
                    cplx a = wg * p0[i];
                    cplx* row = &P[static_cast<std::size_t>(i) * n];
                    for (int j = 0; j < n; ++j) row[j] += a * p1[j];
                }
            }
            if (!any) continue;
            std::vector<cplx> pz = detail::phase_axis(spec, ring.z, -1.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cplx a = P[static_cast<std::size_t>(i) * n + j];
                    if (a == cplx(0.0, 0.0)) continue;
                    cplx* row = &out.values[(static_cast<std::size_t>(i) * n + j) * n];
                    for (int l = 0; l < n; ++l) row[l] += a * pz[l];
                }
        }
        return out;
    }
    for (std::size_t k = 0; k < rule.size(); ++k) {
        cplx wg = rule.weights[k] * g.values[k];
        if (wg == cplx(0.0, 0.0)) continue;
        std::vector<cplx> p0 = detail::phase_axis(spec, rule.nodes[k][0], -1.0);
        std::vector<cplx> p1 = detail::phase_axis(spec, rule.nodes[k][1], -1.0);
        std::vector<cplx> p2 = detail::phase_axis(spec, rule.nodes[k][2], -1.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx a = wg * p0[i] * p1[j];
                cplx* row = &out.values[(static_cast<std::size_t>(i) * n + j) * n];
                for (int l = 0; l < n; ++l) row[l] += a * p2[l];
            }
    }
    return out;
}

// One windowed slice with a node-dependent scale.
inline SphereFn linearized_apply(const GridFn& f, const ScaleAssignment& assign,
                                 TruncationReport* rep = nullptr) {
    detail::require_sphere_in_dual_box(f.spec);
    detail::note_truncation(f, rep);
    return SphereFn(assign.rule, detail::windowed_nudft(f, *assign.rule, assign.eps));
}

// All windowed slices over a ladder, kept separate (complex values). The
// maximal operator is the pointwise modulus max over these.
inline std::vector<SphereFn> maximal_restrict_slices(const GridFn& f, const SphereRulePtr& rule,
                                                     const ScaleLadder& ladder,
                                                     TruncationReport* rep = nullptr) {
    detail::require_sphere_in_dual_box(f.spec);
    ladder.check_bounds(f.spec);
    detail::note_truncation(f, rep);
    std::vector<SphereFn> slices;
    slices.reserve(ladder.scales.size());
    for (double e : ladder.scales) {
        std::vector<double> eps(rule->size(), e);
        slices.emplace_back(rule, detail::windowed_nudft(f, *rule, eps));
    }
    return slices;
}

inline SphereFn maximal_restrict(const GridFn& f, const SphereRulePtr& rule,
                                 const ScaleLadder& ladder, TruncationReport* rep = nullptr) {
    std::vector<SphereFn> slices = maximal_restrict_slices(f, rule, ladder, rep);
    SphereFn out(rule);
    for (const SphereFn& s : slices)
        for (std::size_t k = 0; k < out.values.size(); ++k) {
            double v = std::abs(s.values[k]);
            if (v > out.values[k].real()) out.values[k] = cplx(v, 0.0);
        }
    return out;
}

// Averages of |f^| over dual-grid balls with the eps^{-d} normalization (not
// ball volume), maximized over the ladder.
inline SphereFn positive_maximal(const GridFn& f, const SphereRulePtr& rule,
                                 const ScaleLadder& ladder, TruncationReport* rep = nullptr) {
    detail::require_sphere_in_dual_box(f.spec);
    ladder.check_bounds(f.spec);
    if (ladder.min() < f.spec.dual_spacing() * (1.0 - 1e-12))
        throw std::invalid_argument("positive maximal: ladder scale below dual grid spacing");
    detail::note_truncation(f, rep);

    GridFn F = fourier_transform(f);
    const GridSpec& ds = F.spec;
    int n = ds.n;
    double dxi = ds.h();
    double cell = std::pow(dxi, ds.d);

    SphereFn out(rule);
    for (std::size_t k = 0; k < rule->size(); ++k) {
        const auto& nd = rule->nodes[k];
        double best = 0.0;
        for (double e : ladder.scales) {
            double acc = 0.0;
            double e2 = e * e * (1.0 + 1e-12);
            int lo[3], hi[3];
            for (int a = 0; a < ds.d; ++a) {
                lo[a] = std::max(0, static_cast<int>(std::ceil((nd[a] - e + ds.L()) / dxi - 1e-9)));
                hi[a] = std::min(n - 1, static_cast<int>(std::floor((nd[a] + e + ds.L()) / dxi + 1e-9)));
            }
            if (ds.d == 2) {
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    double dx = ds.coord(i) - nd[0];
                    for (int j = lo[1]; j <= hi[1]; ++j) {
                        double dy = ds.coord(j) - nd[1];
                        if (dx * dx + dy * dy <= e2) acc += std::abs(F.at(i, j));
                    }
                }
            } else {
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    double dx = ds.coord(i) - nd[0];
                    for (int j = lo[1]; j <= hi[1]; ++j) {
                        double dy = ds.coord(j) - nd[1];
                        double dxy = dx * dx + dy * dy;
                        if (dxy > e2) continue;
                        for (int l = lo[2]; l <= hi[2]; ++l) {
                            double dz = ds.coord(l) - nd[2];
                            if (dxy + dz * dz <= e2) acc += std::abs(F.at(i, j, l));
                        }
                    }
                }
            }
            double val = acc * cell / std::pow(e, ds.d);
            if (val > best) best = val;
        }
        out.values[k] = cplx(best, 0.0);
    }
    return out;
}

// Adjoint of the linearized operator: sum_k w_k g_k e^{+i omega_k.x} with the
// window factor at each node's scale.
inline GridFn adjoint_apply(const SphereFn& g, const ScaleAssignment& assign,
                            const GridSpec& spec) {
    if (g.rule != assign.rule && g.rule->size() != assign.rule->size())
        throw std::invalid_argument("adjoint: rule mismatch between function and assignment");
    const SphereRule& rule = *assign.rule;
    GridFn out(spec);
    int n = spec.n;

    std::vector<double> distinct;
    for (double v : assign.eps) {
        bool seen = false;
        for (double d : distinct)
            if (d == v) { seen = true; break; }
        if (!seen) distinct.push_back(v);
    }

    for (double e : distinct) {
        std::vector<double> w = detail::window_axis(spec, e);
        if (spec.d == 2) {
            for (std::size_t k = 0; k < rule.size(); ++k) {
                if (assign.eps[k] != e) continue;
                cplx wg = rule.weights[k] * g.values[k];
                if (wg == cplx(0.0, 0.0)) continue;
                std::vector<cplx> p0 = detail::phase_axis(spec, rule.nodes[k][0], 1.0);
                std::vector<cplx> p1 = detail::phase_axis(spec, rule.nodes[k][1], 1.0);
                for (int i = 0; i < n; ++i) {
                    cplx a = wg * w[i] * p0[i];
                    cplx* row = &out.values[static_cast<std::size_t>(i) * n];
                    for (int j = 0; j < n; ++j) row[j] += a * (w[j] * p1[j]);
                }
            }
        } else if (!rule.rings.empty()) {
            std::vector<cplx> P(static_cast<std::size_t>(n) * n);
            for (const auto& ring : rule.rings) {
                std::fill(P.begin(), P.end(), cplx(0.0, 0.0));
                bool any = false;
                for (std::size_t k = ring.start; k < ring.start + ring.count; ++k) {
                    if (assign.eps[k] != e) continue;
                    cplx wg = rule.weights[k] * g.values[k];
                    if (wg == cplx(0.0, 0.0)) continue;
                    any = true;
                    std::vector<cplx> p0 = detail::phase_axis(spec, rule.nodes[k][0], 1.0);
                    std::vector<cplx> p1 = detail::phase_axis(spec, rule.nodes[k][1], 1.0);
                    for (int i = 0; i < n; ++i) {
                        cplx a = wg * p0[i];
                        cplx* row = &P[static_cast<std::size_t>(i) * n];
                        for (int j = 0; j < n; ++j) row[j] += a * p1[j];
                    }
                }
                if (!any) continue;
                std::vector<cplx> pz = detail::phase_axis(spec, ring.z, 1.0);
                for (int j = 0; j < n; ++j) pz[j] *= w[j];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        cplx a = P[static_cast<std::size_t>(i) * n + j] * (w[i] * w[j]);
                        if (a == cplx(0.0, 0.0)) continue;
                        cplx* row = &out.values[(static_cast<std::size_t>(i) * n + j) * n];
                        for (int l = 0; l < n; ++l) row[l] += a * pz[l];
                    }
            }
        } else {
            for (std::size_t k = 0; k < rule.size(); ++k) {
                if (assign.eps[k] != e) continue;
                cplx wg = rule.weights[k] * g.values[k];
                if (wg == cplx(0.0, 0.0)) continue;
                std::vector<cplx> p0 = detail::phase_axis(spec, rule.nodes[k][0], 1.0);
                std::vector<cplx> p1 = detail::phase_axis(spec, rule.nodes[k][1], 1.0);
                std::vector<cplx> p2 = detail::phase_axis(spec, rule.nodes[k][2], 1.0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        cplx a = wg * (w[i] * p0[i]) * (w[j] * p1[j]);
                        cplx* row = &out.values[(static_cast<std::size_t>(i) * n + j) * n];
                        for (int l = 0; l < n; ++l) row[l] += a * (w[l] * p2[l]);
                    }
            }
        }
    }
    return out;
}

// Transform of the adjoint, evaluated directly on the dual grid:
// (2 pi)^d sum_k w_k g_k chi_{eps_k}(xi - omega_k). The (2 pi)^d factor is
// forced by the forward-transform convention and is covered by the
// consistency check against fourier_transform(adjoint_apply(...)).
inline GridFn fourier_of_adjoint(const SphereFn& g, const ScaleAssignment& assign,
                                 const GridSpec& spec) {
    if (g.rule->size() != assign.rule->size())
        throw std::invalid_argument("fourier_of_adjoint: rule mismatch");
    const SphereRule& rule = *assign.rule;
    GridSpec ds = spec.dual();
    GridFn out(ds);
    int n = ds.n;
    double front = std::pow(2.0 * M_PI, ds.d);
    const double cut = 6.0;  // Gaussian reach in units of eps

    auto axis_profile = [&](double center, double e, int& lo, int& hi, std::vector<double>& prof) {
        lo = std::max(0, static_cast<int>(std::ceil((center - cut * e + ds.L()) / ds.h() - 1e-9)));
        hi = std::min(n - 1, static_cast<int>(std::floor((center + cut * e + ds.L()) / ds.h() + 1e-9)));
        prof.assign(std::max(0, hi - lo + 1), 0.0);
        for (int j = lo; j <= hi; ++j) {
            double u = (ds.coord(j) - center) / e;
            prof[j - lo] = std::exp(-M_PI * u * u);
        }
    };

    std::vector<double> distinct;
    for (double v : assign.eps) {
        bool seen = false;
        for (double d : distinct)
            if (d == v) { seen = true; break; }
        if (!seen) distinct.push_back(v);
    }
    for (double e : distinct) {
        if (!(e > 0.0))
            throw std::invalid_argument("fourier_of_adjoint: zero-scale window has no transform");
        double amp = front * std::pow(e, -ds.d);
        if (ds.d == 2) {
            for (std::size_t k = 0; k < rule.size(); ++k) {
                if (assign.eps[k] != e) continue;
                cplx c = amp * rule.weights[k] * g.values[k];
                int lo0, hi0, lo1, hi1;
                std::vector<double> f0, f1;
                axis_profile(rule.nodes[k][0], e, lo0, hi0, f0);
                axis_profile(rule.nodes[k][1], e, lo1, hi1, f1);
                for (int i = lo0; i <= hi0; ++i) {
                    cplx a = c * f0[i - lo0];
                    cplx* row = &out.values[static_cast<std::size_t>(i) * n];
                    for (int j = lo1; j <= hi1; ++j) row[j] += a * f1[j - lo1];
                }
            }
        } else if (!rule.rings.empty()) {
            std::vector<cplx> S(static_cast<std::size_t>(n) * n);
            for (const auto& ring : rule.rings) {
                std::fill(S.begin(), S.end(), cplx(0.0, 0.0));
                bool any = false;
                int slo0 = n, shi0 = -1, slo1 = n, shi1 = -1;
                for (std::size_t k = ring.start; k < ring.start + ring.count; ++k) {
                    if (assign.eps[k] != e) continue;
                    cplx c = amp * rule.weights[k] * g.values[k];
                    if (c == cplx(0.0, 0.0)) continue;
                    any = true;
                    int lo0, hi0, lo1, hi1;
                    std::vector<double> f0, f1;
                    axis_profile(rule.nodes[k][0], e, lo0, hi0, f0);
                    axis_profile(rule.nodes[k][1], e, lo1, hi1, f1);
                    slo0 = std::min(slo0, lo0); shi0 = std::max(shi0, hi0);
                    slo1 = std::min(slo1, lo1); shi1 = std::max(shi1, hi1);
                    for (int i = lo0; i <= hi0; ++i) {
                        cplx a = c * f0[i - lo0];
                        cplx* row = &S[static_cast<std::size_t>(i) * n];
                        for (int j = lo1; j <= hi1; ++j) row[j] += a * f1[j - lo1];
                    }
                }
                if (!any) continue;
                int loz, hiz;
                std::vector<double> fz;
                axis_profile(ring.z, e, loz, hiz, fz);
                for (int i = slo0; i <= shi0; ++i)
                    for (int j = slo1; j <= shi1; ++j) {
                        cplx a = S[static_cast<std::size_t>(i) * n + j];
                        if (a == cplx(0.0, 0.0)) continue;
                        cplx* row = &out.values[(static_cast<std::size_t>(i) * n + j) * n];
                        for (int l = loz; l <= hiz; ++l) row[l] += a * fz[l - loz];
                    }
            }
        } else {
            for (std::size_t k = 0; k < rule.size(); ++k) {
                if (assign.eps[k] != e) continue;
                cplx c = amp * rule.weights[k] * g.values[k];
                int lo0, hi0, lo1, hi1, lo2, hi2;
                std::vector<double> f0, f1, f2;
                axis_profile(rule.nodes[k][0], e, lo0, hi0, f0);
                axis_profile(rule.nodes[k][1], e, lo1, hi1, f1);
                axis_profile(rule.nodes[k][2], e, lo2, hi2, f2);
                for (int i = lo0; i <= hi0; ++i)
                    for (int j = lo1; j <= hi1; ++j) {
                        cplx a = c * f0[i - lo0] * f1[j - lo1];
                        cplx* row = &out.values[(static_cast<std::size_t>(i) * n + j) * n];
                        for (int l = lo2; l <= hi2; ++l) row[l] += a * f2[l - lo2];
                    }
            }
        }
    }
    return out;
}

namespace detail {

// Bilinear (d = 2) or trilinear (d = 3) sample of a grid function at an
// off-lattice point; the caller keeps the point inside the box with one
// cell of headroom.
inline cplx multilinear_sample(const GridFn& fn, double v0, double v1, double v2) {
    const GridSpec& ks = fn.spec;
    double h = ks.h();
    if (ks.d == 2) {
        double u0 = (v0 + ks.L()) / h, u1 = (v1 + ks.L()) / h;
        int i0 = static_cast<int>(std::floor(u0)), i1 = static_cast<int>(std::floor(u1));
        double t0 = u0 - i0, t1 = u1 - i1;
        return (1 - t0) * ((1 - t1) * fn.at(i0, i1) + t1 * fn.at(i0, i1 + 1)) +
               t0 * ((1 - t1) * fn.at(i0 + 1, i1) + t1 * fn.at(i0 + 1, i1 + 1));
    }
    double u0 = (v0 + ks.L()) / h, u1 = (v1 + ks.L()) / h, u2 = (v2 + ks.L()) / h;
    int i0 = static_cast<int>(std::floor(u0)), i1 = static_cast<int>(std::floor(u1)),
        i2 = static_cast<int>(std::floor(u2));
    double t0 = u0 - i0, t1 = u1 - i1, t2 = u2 - i2;
    cplx c00 = (1 - t2) * fn.at(i0, i1, i2) + t2 * fn.at(i0, i1, i2 + 1);
    cplx c01 = (1 - t2) * fn.at(i0, i1 + 1, i2) + t2 * fn.at(i0, i1 + 1, i2 + 1);
    cplx c10 = (1 - t2) * fn.at(i0 + 1, i1, i2) + t2 * fn.at(i0 + 1, i1, i2 + 1);
    cplx c11 = (1 - t2) * fn.at(i0 + 1, i1 + 1, i2) + t2 * fn.at(i0 + 1, i1 + 1, i2 + 1);
    return (1 - t0) * ((1 - t1) * c00 + t1 * c01) + t0 * ((1 - t1) * c10 + t1 * c11);
}

} // namespace detail

// Double quadrature of g1(omega_k) g2(omega_l) K(omega_l - omega_k); the
// kernel is sampled by multilinear interpolation, so its box must cover the
// difference set |v| <= 2 with interpolation headroom.
inline cplx bilinear_form(const SphereFn& g1, const SphereFn& g2, const GridFn& kernel) {
    if (g1.rule->size() != g2.rule->size() || g1.rule->d != g2.rule->d)
        throw std::invalid_argument("bilinear form: rules disagree");
    const GridSpec& ks = kernel.spec;
    if (ks.d != g1.rule->d)
        throw std::invalid_argument("bilinear form: kernel dimension mismatch");
    if (ks.L() < 2.0 + ks.h())
        throw std::invalid_argument("bilinear form: kernel box does not cover the difference set");

    const SphereRule& ra = *g1.rule;
    const SphereRule& rb = *g2.rule;

    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < ra.size(); ++k) {
        cplx ga = ra.weights[k] * g1.values[k];
        if (ga == cplx(0.0, 0.0)) continue;
        cplx inner(0.0, 0.0);
        for (std::size_t l = 0; l < rb.size(); ++l) {
            cplx gb = rb.weights[l] * g2.values[l];
            if (gb == cplx(0.0, 0.0)) continue;
            inner += gb * detail::multilinear_sample(kernel, rb.nodes[l][0] - ra.nodes[k][0],
                                                     rb.nodes[l][1] - ra.nodes[k][1],
                                                     rb.nodes[l][2] - ra.nodes[k][2]);
        }
        acc += ga * inner;
    }
    return acc;
}

inline GridFn autocorrelation(const GridFn& f) {
    return convolve(f, reflect_conjugate(f));
}

namespace detail {

// Per-pair domination ratios sharing one M^2 computation. The smoothed
// kernels are built spectrally: multiplying the transform of h~ by
// exp(-(e^2+e'^2)|xi|^2/(4 pi)) is the exact window pair, free of
// small-scale mollifier sampling error.
inline std::vector<double> domination_ratios(const GridFn& h,
                                             const std::vector<std::pair<double, double>>& pairs,
                                             const ScaleLadder& radii) {
    if (max_abs(h) == 0.0)
        throw std::invalid_argument("domination: degenerate input, nothing above threshold");
    GridFn ht = reflect_conjugate(h);
    GridFn M1 = hl_maximal(ht, radii);
    GridFn M2 = hl_maximal(M1, radii);
    double peak = 0.0;
    for (const cplx& z : M2.values) peak = std::max(peak, z.real());
    if (peak <= 0.0)
        throw std::invalid_argument("domination: degenerate input, nothing above threshold");
    double thresh = 1e-9 * peak;

    GridFn FH = fourier_transform(ht);
    const GridSpec& ds = FH.spec;
    int n = ds.n;

    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& pr : pairs) {
        double s2 = pr.first * pr.first + pr.second * pr.second;
        double c = s2 / (4.0 * M_PI);
        std::vector<double> mx(n);
        for (int j = 0; j < n; ++j) {
            double xi = ds.coord(j);
            mx[j] = std::exp(-c * xi * xi);
        }
        GridFn masked(ds);
        if (ds.d == 2) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) masked.at(i, j) = FH.at(i, j) * (mx[i] * mx[j]);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double mij = mx[i] * mx[j];
                    for (int l = 0; l < n; ++l)
                        masked.at(i, j, l) = FH.at(i, j, l) * (mij * mx[l]);
                }
        }
        GridFn K = inverse_fourier_transform(masked);
        double worst = 0.0;
        for (std::size_t idx = 0; idx < K.values.size(); ++idx) {
            double m2 = M2.values[idx].real();
            if (m2 > thresh)
                worst = std::max(worst, std::abs(K.values[idx]) / (m2 + 1e-300));
        }
        out.push_back(worst);
    }
    return out;
}

} // namespace detail

// Certifies |h~ * chi_e * chi_e'| <= C M^2 h~ empirically: largest ratio over
// the given scale pairs and all nodes where M^2 h~ clears the floor.
inline double domination_ratio(const GridFn& h, const std::vector<std::pair<double, double>>& pairs,
                               const ScaleLadder& radii) {
    std::vector<double> rs = detail::domination_ratios(h, pairs, radii);
    double m = 0.0;
    for (double r : rs) m = std::max(m, r);
    return m;
}

} // namespace rlab
