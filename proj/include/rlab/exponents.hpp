#pragma once

#include <string>
#include <vector>

#include "rlab/rational.hpp"

namespace rlab {

// Holder conjugate: 1/p + 1/p' = 1, with conjugate(1) = inf and
// conjugate(inf) = 1.
inline Rational conjugate(const Rational& p) {
    if (p < Rational(1)) throw std::invalid_argument("conjugate: p < 1");
    if (p.is_infinite()) return Rational(1);
    if (p == Rational(1)) return Rational::infinity();
    return p / (p - Rational(1));
}

struct Constraint {
    std::string name;
    Rational slack;   // >= 0 means satisfied
    bool satisfied() const { return slack >= Rational(0); }
};

struct RangeVerdict {
    bool in_range = false;
    std::vector<Constraint> constraints;
};

namespace detail {
inline RangeVerdict verdict_from(std::vector<Constraint> cs) {
    RangeVerdict v;
    v.in_range = true;
    for (const auto& c : cs)
        if (!c.satisfied()) v.in_range = false;
    v.constraints = std::move(cs);
    return v;
}

// Slack of p' >= (d+1)/(d-1) * q. With p = 1 the conjugate is infinite and
// the slack is reported as infinite.
inline Constraint dual_constraint(int d, const Rational& p, const Rational& q) {
    Rational rhs = Rational(d + 1, d - 1) * q;
    Rational pp = conjugate(p);
    if (pp.is_infinite())
        return {"p' >= (d+1)/(d-1) q", Rational::infinity()};
    return {"p' >= (d+1)/(d-1) q", pp - rhs};
}

inline void check_dpq(int d, const Rational& p, const Rational& q) {
    if (d < 2) throw std::invalid_argument("range check: d must be >= 2");
    if (p < Rational(1) || q < Rational(1))
        throw std::invalid_argument("range check: exponents must be >= 1");
}
} // namespace detail

// Admissible range of the maximal estimate: 1 <= p <= 4/3 and
// p' >= (d+1)/(d-1) q, checked exactly with per-constraint slack.
inline RangeVerdict in_maximal_range(int d, const Rational& p, const Rational& q) {
    detail::check_dpq(d, p, q);
    std::vector<Constraint> cs;
    cs.push_back({"p <= 4/3", Rational(4, 3) - p});
    cs.push_back(detail::dual_constraint(d, p, q));
    return detail::verdict_from(std::move(cs));
}

// Stein-Tomas range: 1 <= p <= 2(d+1)/(d+3) and the same dual constraint.
inline RangeVerdict in_stein_tomas_range(int d, const Rational& p, const Rational& q) {
    detail::check_dpq(d, p, q);
    std::vector<Constraint> cs;
    Rational pmax(2 * (d + 1), d + 3);
    cs.push_back({"p <= 2(d+1)/(d+3)", pmax - p});
    cs.push_back(detail::dual_constraint(d, p, q));
    return detail::verdict_from(std::move(cs));
}

// The endpoint q for p = 4/3: the unique q with zero slack in the dual
// constraint, i.e. 4 = (d+1)/(d-1) q, so q = 4(d-1)/(d+1). Note the value
// 4(d+1)/(d-1) sometimes quoted elsewhere is inconsistent with the d = 3
// endpoint L^{4/3} -> L^2; both are surfaced by the CLI, this one is adopted.
inline Rational endpoint_q(int d) {
    if (d < 2) throw std::invalid_argument("endpoint_q: d must be >= 2");
    return Rational(4 * (d - 1), d + 1);
}

// The as-printed variant, kept only for the CLI to display alongside the
// adopted value.
inline Rational endpoint_q_variant(int d) {
    if (d < 2) throw std::invalid_argument("endpoint_q_variant: d must be >= 2");
    return Rational(4 * (d + 1), d - 1);
}

struct YoungChain {
    Rational p;
    Rational s;       // 1 + 1/s = 2/p
    Rational s_conj;
    Rational p_conj;  // p' = 2 s'
    Rational q_bound(int d) const {
        if (p_conj.is_infinite()) return Rational::infinity();
        return p_conj * Rational(d - 1, d + 1);
    }
};

// The convolution-exponent chain: 1 + 1/s = 2/p forces s = p/(2-p), and the
// square-root step forces p' = 2s'. The chain only closes for s <= 4/3,
// equivalently p <= 8/7.
inline YoungChain young_chain(const Rational& p) {
    if (p < Rational(1)) throw std::invalid_argument("young_chain: p < 1");
    if (p > Rational(8, 7))
        throw std::invalid_argument(
            "young_chain: p > 8/7 makes s = p/(2-p) exceed 4/3, the chain does not close");
    YoungChain c;
    c.p = p;
    c.s = p / (Rational(2) - p);
    c.s_conj = conjugate(c.s);
    c.p_conj = c.s_conj.is_infinite() ? Rational::infinity() : Rational(2) * c.s_conj;
    return c;
}

struct ThresholdTrace {
    Rational value;
    std::vector<std::string> steps;
};

// Largest p for which the chain closes, with its derivation trace.
inline ThresholdTrace lebesgue_threshold() {
    ThresholdTrace t;
    t.value = Rational(8, 7);
    t.steps = {
        "s <= 4/3 (convolution exponent cap)",
        "s' = conjugate(4/3) = 4",
        "p' = 2 s' = 8",
        "p = conjugate(8) = 8/7",
    };
    return t;
}

} // namespace rlab
