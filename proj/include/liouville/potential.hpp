#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "polynomial.hpp"

namespace liouville {

// V(x) = 1 + A0(x1^4 + x2^4) + A1(x1^3 x2 - x1 x2^3) + A2 x1^2 x2^2
//        + D0(x1^6 - x2^6) + D1(x1^5 x2 + x1 x2^5) + D2(x1^2 x2^4 - x1^4 x2^2) + D3 x1^3 x2^3 + remainder(x).
// D2 is signed so that V(y^{1/2}) has y1 y2^2 coefficient (3 D0 - D2)/4, the convention of the
// reduced field F; the x^4 x2^2 monomial therefore carries the partner D4 = -D2.
struct PotentialCoeffs {
    double A0 = 0, A1 = 0, A2 = 0;
    double D0 = 0, D1 = 0, D2 = 0, D3 = 0;
    std::function<double(Point)> remainder;  // O(|x|^7); empty means zero

    double A3() const { return -A1; }
    double A4() const { return A0; }
    double D4() const { return -D2; }
    double D5() const { return D1; }
    double D6() const { return -D0; }

    bool polynomial() const { return !remainder; }
    bool satisfies_constraint(double tol = 1e-12) const {
        return std::fabs(A0 - 2) <= tol && std::fabs(A1) <= tol && std::fabs(A2 - 4) <= tol;
    }

    static PotentialCoeffs constant() { return {}; }
    static PotentialCoeffs example() {
        PotentialCoeffs c;
        c.A0 = 2, c.A1 = 0, c.A2 = 4;
        c.D0 = 0, c.D1 = 2, c.D2 = -4, c.D3 = -4;
        return c;
    }
};

// Polynomial part of V in x, over any coefficient ring.
template <class T>
Poly2<T> v_polynomial(T A0, T A1, T A2, T D0, T D1, T D2, T D3) {
    const T A[5] = {A0, A1, A2, -A1, A0};
    const T D[7] = {D0, D1, -D2, D3, D2, D1, -D0};
    Poly2<T> p(T(1));
    for (int j = 0; j < 5; ++j) p.add_term(4 - j, j, A[j]);
    for (int j = 0; j < 7; ++j) p.add_term(6 - j, j, D[j]);
    return p;
}

// Closed form of V(y^{1/2}) as a polynomial in y (polynomial part only).
template <class T>
Poly2<T> v_half_polynomial(T A0, T A1, T A2, T D0, T D1, T D2, T D3) {
    Poly2<T> p(T(1));
    p.add_term(2, 0, A0);
    p.add_term(1, 1, A1 / T(2));
    p.add_term(0, 2, A0 / T(2) + A2 / T(4));
    p.add_term(3, 0, D0);
    p.add_term(2, 1, D1 / T(2));
    p.add_term(1, 2, (T(3) * D0 - D2) / T(4));
    p.add_term(0, 3, D1 / T(4) + D3 / T(8));
    return p;
}

// True when V_half(x1^2 - x2^2, 2 x1 x2) == V(x) coefficient by coefficient in exact
// rational arithmetic. Requires dyadic-rational coefficients.
inline bool half_identity_exact(const PotentialCoeffs& c) {
    auto r = [](double v) { return to_rational(v); };
    const auto v = v_polynomial<Rational>(r(c.A0), r(c.A1), r(c.A2), r(c.D0), r(c.D1), r(c.D2), r(c.D3));
    const auto vh = v_half_polynomial<Rational>(r(c.A0), r(c.A1), r(c.A2), r(c.D0), r(c.D1), r(c.D2), r(c.D3));
    const auto x1 = Poly2<Rational>::var(0), x2 = Poly2<Rational>::var(1);
    const auto y1 = x1 * x1 - x2 * x2;
    const auto y2 = Rational(2) * x1 * x2;
    return vh.compose(y1, y2) == v;
}

inline double quartic_part(const PotentialCoeffs& c, Point x) {
    const double a = x.x1, b = x.x2, a2 = a * a, b2 = b * b;
    return c.A0 * (a2 * a2 + b2 * b2) + c.A1 * (a2 * a * b - a * b2 * b) + c.A2 * a2 * b2;
}

inline double sextic_part(const PotentialCoeffs& c, Point x) {
    const double a = x.x1, b = x.x2;
    const double a2 = a * a, b2 = b * b, a3 = a2 * a, b3 = b2 * b;
    return c.D0 * (a3 * a3 - b3 * b3) + c.D1 * (a3 * a2 * b + a * b2 * b2 * b) + c.D2 * (a2 * b2 * b2 - a2 * a2 * b2) +
           c.D3 * a3 * b3;
}

inline double eval_V(const PotentialCoeffs& c, Point x) {
    double v = 1.0 + quartic_part(c, x) + sextic_part(c, x);
    if (c.remainder) v += c.remainder(x);
    return v;
}

// V(y^{1/2}) - 1 for the polynomial part, in the closed y-form. Kept separate so callers can
// use log1p without cancellation.
inline double v_half_minus_one(const PotentialCoeffs& c, Point y) {
    const double a = y.x1, b = y.x2;
    const double quad = c.A0 * a * a + 0.5 * c.A1 * a * b + (0.5 * c.A0 + 0.25 * c.A2) * b * b;
    const double cub = c.D0 * a * a * a + 0.5 * c.D1 * a * a * b + 0.25 * (3 * c.D0 - c.D2) * a * b * b +
                       (0.25 * c.D1 + 0.125 * c.D3) * b * b * b;
    double v = quad + cub;
    if (c.remainder) v += c.remainder(sqrt_point(y));
    return v;
}

enum class HalfMode { closed_form, root };

inline double eval_V_half(const PotentialCoeffs& c, Point y, HalfMode mode = HalfMode::closed_form) {
    if (mode == HalfMode::root) return eval_V(c, sqrt_point(y));
    return 1.0 + v_half_minus_one(c, y);
}

inline double log_V_half(const PotentialCoeffs& c, Point y) { return std::log1p(v_half_minus_one(c, y)); }

// Expansion of V(x^{1/2})/V(b^{1/2}) in y = x - b, truncated as in the standard local
// analysis: linear block from the quadratic part at b, cubic blocks C(y) + grad C(b).y, and
// the quadratic form P(y).
struct VHalfExpansion {
    Point b;
    double lin1 = 0, lin2 = 0;               // gradient of the quadratic part at b
    double cub[4] = {0, 0, 0, 0};            // y1^3, y1^2 y2, y1 y2^2, y2^3
    double cub_lin1 = 0, cub_lin2 = 0;       // gradient of the cubic part at b
    double p11 = 0, p12 = 0, p22 = 0;        // P(y) = p11 y1^2 + p12 y1 y2 + p22 y2^2

    double evaluate(Point x) const {
        const Point y = x - b;
        const double a = y.x1, e = y.x2;
        return 1.0 + lin1 * a + lin2 * e + cub_lin1 * a + cub_lin2 * e + cub[0] * a * a * a + cub[1] * a * a * e +
               cub[2] * a * e * e + cub[3] * e * e * e + p11 * a * a + p12 * a * e + p22 * e * e;
    }

    // Order tag |b||y|^2 + |b|^3|y| + |y|^{7/2} + |b|^{7/2} at a given (|y|, |b|).
    static double order_bound(double ny, double nb) {
        return nb * ny * ny + nb * nb * nb * ny + std::pow(ny, 3.5) + std::pow(nb, 3.5);
    }
};

inline VHalfExpansion taylor_V_half_around(const PotentialCoeffs& c, Point b) {
    VHalfExpansion t;
    t.b = b;
    t.p11 = c.A0;
    t.p12 = 0.5 * c.A1;
    t.p22 = 0.5 * c.A0 + 0.25 * c.A2;
    t.lin1 = 2 * t.p11 * b.x1 + t.p12 * b.x2;
    t.lin2 = t.p12 * b.x1 + 2 * t.p22 * b.x2;
    t.cub[0] = c.D0;
    t.cub[1] = 0.5 * c.D1;
    t.cub[2] = 0.25 * (3 * c.D0 - c.D2);
    t.cub[3] = 0.25 * c.D1 + 0.125 * c.D3;
    const double b1 = b.x1, b2 = b.x2;
    t.cub_lin1 = 3 * t.cub[0] * b1 * b1 + 2 * t.cub[1] * b1 * b2 + t.cub[2] * b2 * b2;
    t.cub_lin2 = t.cub[1] * b1 * b1 + 2 * t.cub[2] * b1 * b2 + 3 * t.cub[3] * b2 * b2;
    return t;
}

struct HypothesisReport {
    double positivity_margin = 0;  // min of V on the validation grid
    bool positive = false;
    bool even = false;
    bool normalized = false;  // V(0) = 1
    bool constraint = false;  // A0 = 2, A1 = 0, A2 = 4
    std::vector<std::string> violations;

    bool all_pass() const { return positive && even && normalized && constraint; }
};

inline HypothesisReport check_hypotheses(const PotentialCoeffs& c, int grid = 401, double min_positivity = 1e-6) {
    HypothesisReport rep;
    double vmin = eval_V(c, {0, 0});
    double odd = 0, scale = 1;
    for (int i = 0; i < grid; ++i) {
        const double r = static_cast<double>(i) / (grid - 1);
        for (int j = 0; j < grid; ++j) {
            const Point x = polar(r, kTwoPi * j / grid);
            const double v = eval_V(c, x);
            vmin = std::min(vmin, v);
            if (c.remainder) {
                odd = std::max(odd, std::fabs(v - eval_V(c, -x)));
                scale = std::max(scale, std::fabs(v));
            }
        }
    }
    rep.positivity_margin = vmin;
    rep.positive = vmin > min_positivity;
    rep.even = c.polynomial() || odd <= 1e-12 * scale;
    rep.normalized = std::fabs(eval_V(c, {0, 0}) - 1.0) <= 1e-14;
    rep.constraint = c.satisfies_constraint();
    if (!rep.positive) rep.violations.push_back("positivity: min V on grid = " + std::to_string(vmin));
    if (!rep.even) rep.violations.push_back("evenness: max |V(x)-V(-x)| = " + std::to_string(odd));
    if (!rep.normalized) rep.violations.push_back("normalization: V(0) != 1");
    if (!rep.constraint) rep.violations.push_back("structural constraint A0=2, A1=0, A2=4 violated");
    return rep;
}

}  // namespace liouville
