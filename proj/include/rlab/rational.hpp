#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rlab {

// Exact rational arithmetic for exponent bookkeeping. Denominator is kept
// positive and the fraction reduced; a distinguished infinity value is
// supported because conjugates of 1 show up constantly (p = 1 gives p' = inf).
class Rational {
public:
    Rational() : num_(0), den_(1), inf_(false) {}
    Rational(long long n) : num_(n), den_(1), inf_(false) {}
    Rational(long long n, long long d) : num_(n), den_(d), inf_(false) {
        if (den_ == 0) throw std::invalid_argument("rational: zero denominator");
        reduce();
    }

    static Rational infinity() {
        Rational r;
        r.inf_ = true;
        r.num_ = 1;
        return r;
    }

    static Rational parse(const std::string& s) {
        if (s == "inf" || s == "infinity") return infinity();
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) {
                size_t pos = 0;
                long long n = std::stoll(s, &pos);
                if (pos != s.size()) throw std::invalid_argument("trailing junk");
                return Rational(n);
            }
            size_t pos = 0;
            long long n = std::stoll(s.substr(0, slash), &pos);
            if (pos != slash) throw std::invalid_argument("trailing junk");
            long long d = std::stoll(s.substr(slash + 1), &pos);
            if (pos != s.size() - slash - 1) throw std::invalid_argument("trailing junk");
            return Rational(n, d);
        } catch (const std::exception&) {
            throw std::invalid_argument("rational: cannot parse '" + s + "'");
        }
    }

    bool is_infinite() const { return inf_; }
    long long num() const { return num_; }
    long long den() const { return den_; }

    double to_double() const {
        if (inf_) return std::numeric_limits<double>::infinity();
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    // Canonical "num/den" form; infinity spelled out.
    std::string str() const {
        if (inf_) return "inf";
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Readable form: integers drop the denominator.
    std::string display() const {
        if (inf_) return "inf";
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    Rational operator+(const Rational& o) const {
        if (inf_ || o.inf_) return infinity();
        return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    Rational operator-(const Rational& o) const {
        if (inf_ && o.inf_) throw std::invalid_argument("rational: inf - inf");
        if (inf_) return infinity();
        if (o.inf_) throw std::invalid_argument("rational: finite - inf");
        return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }
    Rational operator*(const Rational& o) const {
        if (inf_ || o.inf_) {
            if ((inf_ ? o : *this) <= Rational(0))
                throw std::invalid_argument("rational: inf * nonpositive");
            return infinity();
        }
        return Rational(num_ * o.num_, den_ * o.den_);
    }
    Rational operator/(const Rational& o) const {
        if (o.inf_) {
            if (inf_) throw std::invalid_argument("rational: inf / inf");
            return Rational(0);
        }
        if (o.num_ == 0) throw std::invalid_argument("rational: division by zero");
        if (inf_) return infinity();
        return Rational(num_ * o.den_, den_ * o.num_);
    }

    bool operator==(const Rational& o) const {
        if (inf_ || o.inf_) return inf_ == o.inf_;
        return num_ == o.num_ && den_ == o.den_;
    }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        if (inf_) return false;
        if (o.inf_) return true;
        return num_ * o.den_ < o.num_ * den_;
    }
    bool operator<=(const Rational& o) const { return *this < o || *this == o; }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

private:
    void reduce() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    long long num_;
    long long den_;
    bool inf_;
};

} // namespace rlab
