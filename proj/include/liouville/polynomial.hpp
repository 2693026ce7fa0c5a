#pragma once

#include <cmath>
#include <map>
#include <type_traits>
#include <stdexcept>
#include <utility>

#include <boost/rational.hpp>

namespace liouville {

// Sparse bivariate polynomial sum c_{ij} t1^i t2^j over an arbitrary coefficient ring.
template <class T>
class Poly2 {
public:
    using Key = std::pair<int, int>;

    Poly2() = default;
    explicit Poly2(T constant) { add_term(0, 0, constant); }

    static Poly2 var(int which) {
        Poly2 p;
        p.add_term(which == 0 ? 1 : 0, which == 0 ? 0 : 1, T(1));
        return p;
    }

    void add_term(int i, int j, T c) {
        T& slot = terms_[{i, j}];
        slot += c;
        if (slot == T(0)) terms_.erase({i, j});
    }

    T coeff(int i, int j) const {
        auto it = terms_.find({i, j});
        return it == terms_.end() ? T(0) : it->second;
    }

    const std::map<Key, T>& terms() const { return terms_; }

    int degree() const {
        int d = -1;
        for (const auto& [k, c] : terms_) d = std::max(d, k.first + k.second);
        return d;
    }

    Poly2 homogeneous_part(int d) const {
        Poly2 out;
        for (const auto& [k, c] : terms_)
            if (k.first + k.second == d) out.add_term(k.first, k.second, c);
        return out;
    }

    template <class S>
    S eval(S t1, S t2) const {
        S acc(0);
        for (const auto& [k, c] : terms_) acc += convert<S>(c) * ipow(t1, k.first) * ipow(t2, k.second);
        return acc;
    }

    // Substitutes t1 -> q1, t2 -> q2.
    Poly2 compose(const Poly2& q1, const Poly2& q2) const {
        Poly2 out;
        for (const auto& [k, c] : terms_) out += Poly2(c) * q1.pow(k.first) * q2.pow(k.second);
        return out;
    }

    Poly2 pow(int n) const {
        Poly2 out(T(1));
        for (int i = 0; i < n; ++i) out = out * *this;
        return out;
    }

    Poly2& operator+=(const Poly2& o) {
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
        return *this;
    }
    friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
    friend Poly2 operator-(Poly2 a, const Poly2& b) { return a += b * T(-1); }
    friend Poly2 operator*(const Poly2& a, T s) {
        Poly2 out;
        for (const auto& [k, c] : a.terms_) out.add_term(k.first, k.second, c * s);
        return out;
    }
    friend Poly2 operator*(T s, const Poly2& a) { return a * s; }
    friend Poly2 operator*(const Poly2& a, const Poly2& b) {
        Poly2 out;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) out.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
        return out;
    }
    friend bool operator==(const Poly2& a, const Poly2& b) { return a.terms_ == b.terms_; }

private:
    template <class S>
    static S convert(const T& c) {
        if constexpr (std::is_same_v<T, boost::rational<long long>> && !std::is_same_v<S, T>)
            return boost::rational_cast<S>(c);
        else
            return S(c);
    }

    template <class S>
    static S ipow(S base, int n) {
        S r(1);
        for (int i = 0; i < n; ++i) r *= base;
        return r;
    }

    std::map<Key, T> terms_;
};

using Rational = boost::rational<long long>;

// Exact conversion of a dyadic double (e.g. 2, -4, 0.375). Throws when the value needs
// more than 40 binary digits after the point.
inline Rational to_rational(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("to_rational: non-finite value");
    long long den = 1;
    double scaled = v;
    for (int k = 0; k <= 40; ++k) {
        if (scaled == std::floor(scaled) && std::fabs(scaled) < 9.0e15) return Rational(static_cast<long long>(scaled), den);
        scaled *= 2.0;
        den *= 2;
    }
    throw std::invalid_argument("to_rational: value is not a short dyadic rational");
}

}  // namespace liouville
