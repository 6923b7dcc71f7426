#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rlab/grid.hpp"
#include "rlab/rational.hpp"

namespace rlab {

// Quadrature for the surface measure on S^{d-1}. Nodes are unit vectors (the
// third component stays 0 in d = 2); exactness is the polynomial degree up to
// which the rule integrates spherical harmonics to zero. Product rules in
// d = 3 keep their ring layout so operators can factor work over rings of
// constant polar angle.
struct SphereRule {
    struct Ring {
        std::size_t start = 0;
        std::size_t count = 0;
        double z = 0.0;  // cos(theta), shared by the ring
        double s = 0.0;  // sin(theta)
    };

    int d = 3;
    std::vector<std::array<double, 3>> nodes;
    std::vector<double> weights;
    int exactness = 0;
    std::vector<Ring> rings;  // empty when the rule has no ring structure

    std::size_t size() const { return nodes.size(); }
};

using SphereRulePtr = std::shared_ptr<const SphereRule>;

struct SphereFn {
    SphereRulePtr rule;
    std::vector<cplx> values;

    SphereFn() = default;
    explicit SphereFn(SphereRulePtr r) : rule(std::move(r)), values(rule->size(), cplx(0.0, 0.0)) {}
    SphereFn(SphereRulePtr r, std::vector<cplx> v) : rule(std::move(r)), values(std::move(v)) {
        if (values.size() != rule->size())
            throw std::invalid_argument("sphere fn: value count does not match rule");
    }
};

namespace detail {

// Gauss-Legendre nodes and weights on (-1, 1) by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double t = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        // one clean evaluation of P' at the converged node
        double p0 = 1.0, p1 = t;
        for (int j = 2; j <= n; ++j) {
            double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[k] = t;
        w[k] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

inline void validate_rule(const SphereRule& r) {
    double total = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const auto& nd = r.nodes[k];
        double len = std::sqrt(nd[0] * nd[0] + nd[1] * nd[1] + nd[2] * nd[2]);
        if (std::abs(len - 1.0) > 1e-12) throw std::logic_error("sphere rule: node off the sphere");
        if (!(r.weights[k] > 0.0)) throw std::logic_error("sphere rule: nonpositive weight");
        total += r.weights[k];
    }
    double measure = r.d == 2 ? 2.0 * M_PI : 4.0 * M_PI;
    if (std::abs(total - measure) > 1e-10)
        throw std::logic_error("sphere rule: weights do not sum to the surface measure");
}

} // namespace detail

// Uniform rule on the unit circle.
inline SphereRulePtr circle_rule(int m) {
    if (m < 8) throw std::invalid_argument("circle rule: need at least 8 nodes");
    auto rule = std::make_shared<SphereRule>();
    rule->d = 2;
    rule->exactness = m - 1;
    rule->nodes.reserve(m);
    rule->weights.assign(m, 2.0 * M_PI / m);
    for (int k = 0; k < m; ++k) {
        double ph = 2.0 * M_PI * k / m;
        rule->nodes.push_back({std::cos(ph), std::sin(ph), 0.0});
    }
    detail::validate_rule(*rule);
    return rule;
}

// Product rule on S^2: Gauss-Legendre in cos(theta) times uniform in phi.
inline SphereRulePtr sphere_rule(int ntheta, int nphi) {
    if (ntheta < 8 || nphi < 16)
        throw std::invalid_argument("sphere rule: need ntheta >= 8 and nphi >= 16");
    std::vector<double> z, wz;
    detail::gauss_legendre(ntheta, z, wz);
    auto rule = std::make_shared<SphereRule>();
    rule->d = 3;
    rule->exactness = std::min(2 * ntheta - 1, nphi - 1);
    rule->nodes.reserve(static_cast<std::size_t>(ntheta) * nphi);
    rule->weights.reserve(static_cast<std::size_t>(ntheta) * nphi);
    double wphi = 2.0 * M_PI / nphi;
    for (int i = 0; i < ntheta; ++i) {
        SphereRule::Ring ring;
        ring.start = rule->nodes.size();
        ring.count = static_cast<std::size_t>(nphi);
        ring.z = z[i];
        ring.s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
        for (int j = 0; j < nphi; ++j) {
            double ph = 2.0 * M_PI * j / nphi;
            rule->nodes.push_back({ring.s * std::cos(ph), ring.s * std::sin(ph), ring.z});
            rule->weights.push_back(wz[i] * wphi);
        }
        rule->rings.push_back(ring);
    }
    detail::validate_rule(*rule);
    return rule;
}

inline cplx integrate(const SphereFn& g) {
    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < g.values.size(); ++k) acc += g.rule->weights[k] * g.values[k];
    return acc;
}

inline double lq_norm_sigma(const SphereFn& g, const Rational& q) {
    if (q.is_infinite()) {
        double m = 0.0;
        for (const cplx& z : g.values) m = std::max(m, std::abs(z));
        return m;
    }
    if (q < Rational(1)) throw std::invalid_argument("lq_norm_sigma: q must be >= 1");
    double qd = q.to_double();
    double acc = 0.0;
    if (q == Rational(1)) {
        for (std::size_t k = 0; k < g.values.size(); ++k)
            acc += g.rule->weights[k] * std::abs(g.values[k]);
    } else if (q == Rational(2)) {
        for (std::size_t k = 0; k < g.values.size(); ++k)
            acc += g.rule->weights[k] * std::norm(g.values[k]);
    } else {
        for (std::size_t k = 0; k < g.values.size(); ++k)
            acc += g.rule->weights[k] * std::pow(std::abs(g.values[k]), qd);
    }
    return std::pow(acc, 1.0 / qd);
}

template <typename FN>
SphereFn make_sphere_fn(const SphereRulePtr& rule, FN&& f) {
    SphereFn g(rule);
    for (std::size_t k = 0; k < rule->size(); ++k) {
        const auto& nd = rule->nodes[k];
        g.values[k] = f(nd[0], nd[1], nd[2]);
    }
    return g;
}

} // namespace rlab
