#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "potential.hpp"

namespace liouville {

inline Point eval_F(Point xi, const PotentialCoeffs& c) {
    const double a = xi.x1, b = xi.x2;
    const double f1 = 3 * c.D0 * a * a + c.D1 * a * b + 0.25 * (3 * c.D0 - c.D2) * b * b + 0.25 * (15 * c.D0 - c.D2);
    const double f2 = 0.5 * c.D1 * a * a + 0.5 * (3 * c.D0 - c.D2) * a * b + 0.375 * (2 * c.D1 + c.D3) * b * b +
                      0.125 * (10 * c.D1 + 3 * c.D3);
    return {f1, f2};
}

inline double eval_J(Point xi, const PotentialCoeffs& c) {
    const double a = xi.x1, b = xi.x2;
    return c.D0 * a * a * a + 0.5 * c.D1 * a * a * b + 0.25 * (3 * c.D0 - c.D2) * a * b * b +
           0.125 * (2 * c.D1 + c.D3) * b * b * b + 0.25 * (15 * c.D0 - c.D2) * a + 0.125 * (10 * c.D1 + 3 * c.D3) * b;
}

// Symmetric Hessian of J, i.e. the Jacobian of F: {h11, h12, h22}.
inline std::array<double, 3> hessian_J(Point xi, const PotentialCoeffs& c) {
    const double a = xi.x1, b = xi.x2;
    return {6 * c.D0 * a + c.D1 * b, c.D1 * a + 0.5 * (3 * c.D0 - c.D2) * b,
            0.5 * (3 * c.D0 - c.D2) * a + 0.75 * (2 * c.D1 + c.D3) * b};
}

enum class CriticalType { min, max, saddle, degenerate };

inline const char* to_string(CriticalType t) {
    switch (t) {
        case CriticalType::min: return "min";
        case CriticalType::max: return "max";
        case CriticalType::saddle: return "saddle";
        default: return "degenerate";
    }
}

struct Classification {
    std::array<double, 2> eigs;  // ascending
    CriticalType type;
};

inline Classification classify(const PotentialCoeffs& c, Point xi) {
    const auto [h11, h12, h22] = hessian_J(xi, c);
    const double m = 0.5 * (h11 + h22);
    const double r = std::hypot(0.5 * (h11 - h22), h12);
    Classification out{{m - r, m + r}, CriticalType::saddle};
    const double det = h11 * h22 - h12 * h12;
    if (std::fabs(det) < 1e-10)
        out.type = CriticalType::degenerate;
    else if (out.eigs[0] > 0)
        out.type = CriticalType::min;
    else if (out.eigs[1] < 0)
        out.type = CriticalType::max;
    return out;
}

class DegreeUndefinedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline double wrap_angle(double d) {
    while (d > std::numbers::pi) d -= kTwoPi;
    while (d <= -std::numbers::pi) d += kTwoPi;
    return d;
}
}  // namespace detail

struct DegreeResult {
    int degree = 0;
    double min_abs_F = 0;
    double rounding_residue = 0;
};

inline DegreeResult brouwer_degree_detail(const PotentialCoeffs& c, Point center, double radius, int n_samples = 720,
                                          double floor = 1e-9) {
    if (radius <= 0 || n_samples < 8) throw std::invalid_argument("brouwer_degree: bad circle");
    DegreeResult res;
    res.min_abs_F = std::numeric_limits<double>::infinity();
    auto arg_at = [&](double t) {
        const Point f = eval_F(center + polar(radius, t), c);
        const double nf = f.norm();
        res.min_abs_F = std::min(res.min_abs_F, nf);
        if (nf < floor) throw DegreeUndefinedError("brouwer_degree: |F| below floor on the circle");
        return std::atan2(f.x2, f.x1);
    };
    // Adaptive refinement when consecutive samples jump by more than pi/2.
    std::function<double(double, double, double, double, int)> sweep = [&](double t0, double a0, double t1, double a1,
                                                                           int depth) -> double {
        const double d = detail::wrap_angle(a1 - a0);
        if (std::fabs(d) <= std::numbers::pi / 2 || depth > 40) return d;
        const double tm = 0.5 * (t0 + t1);
        const double am = arg_at(tm);
        return sweep(t0, a0, tm, am, depth + 1) + sweep(tm, am, t1, a1, depth + 1);
    };
    double total = 0;
    const double a_start = arg_at(0.0);
    double prev = a_start;
    for (int k = 1; k <= n_samples; ++k) {
        const double t = kTwoPi * k / n_samples;
        const double a = k == n_samples ? a_start : arg_at(t);
        total += sweep(kTwoPi * (k - 1) / n_samples, prev, t, a, 0);
        prev = a;
    }
    const double w = total / kTwoPi;
    res.degree = static_cast<int>(std::lround(w));
    res.rounding_residue = std::fabs(w - res.degree);
    if (res.rounding_residue >= 0.1) throw DegreeUndefinedError("brouwer_degree: winding number not resolved");
    return res;
}

inline int brouwer_degree(const PotentialCoeffs& c, Point center, double radius, int n_samples = 720) {
    return brouwer_degree_detail(c, center, radius, n_samples).degree;
}

struct ReducedZero {
    Point xi;
    double residual = 0;
    int degree = 0;
    std::array<double, 2> hessian_eigs{};
    CriticalType type = CriticalType::degenerate;
    bool stable = false;
};

struct Box {
    double x_min = -3, x_max = 3, y_min = -3, y_max = 3;
    bool contains(Point p) const { return p.x1 >= x_min && p.x1 <= x_max && p.x2 >= y_min && p.x2 <= y_max; }
};

struct ZeroSearch {
    std::vector<ReducedZero> zeros;
    bool degenerate_field = false;  // F identically zero
    int singular_seeds = 0;
    int diverged_seeds = 0;
};

inline bool field_is_degenerate(const PotentialCoeffs& c) {
    return c.D0 == 0 && c.D1 == 0 && c.D2 == 0 && c.D3 == 0;
}

inline ZeroSearch find_zeros(const PotentialCoeffs& c, const Box& box, int n_starts = 20, double tol = 1e-12) {
    if (!(tol > 0) || n_starts < 1) throw std::invalid_argument("find_zeros: bad arguments");
    ZeroSearch out;
    if (field_is_degenerate(c)) {
        out.degenerate_field = true;
        return out;
    }
    const double dedup = 1e3 * tol;
    const double span = std::max(box.x_max - box.x_min, box.y_max - box.y_min);
    std::vector<Point> found;
    for (int i = 0; i < n_starts; ++i) {
        for (int j = 0; j < n_starts; ++j) {
            Point x{box.x_min + (box.x_max - box.x_min) * (i + 0.5) / n_starts,
                    box.y_min + (box.y_max - box.y_min) * (j + 0.5) / n_starts};
            bool ok = false, singular = false;
            for (int it = 0; it < 100; ++it) {
                const Point f = eval_F(x, c);
                const auto [h11, h12, h22] = hessian_J(x, c);
                const double det = h11 * h22 - h12 * h12;
                const double scale = std::max({std::fabs(h11), std::fabs(h12), std::fabs(h22), 1e-300});
                if (std::fabs(det) < 1e-14 * scale * scale) {
                    singular = f.norm() > tol;
                    ok = !singular;
                    break;
                }
                const Point step{(h22 * f.x1 - h12 * f.x2) / det, (-h12 * f.x1 + h11 * f.x2) / det};
                x = x - step;
                if ((x - Point{0.5 * (box.x_min + box.x_max), 0.5 * (box.y_min + box.y_max)}).norm() > 100 * span) break;
                if (step.norm() <= 1e-15 * std::max(1.0, x.norm()) || eval_F(x, c).norm() <= 0.01 * tol) {
                    ok = true;
                    break;
                }
            }
            if (singular) {
                ++out.singular_seeds;
                continue;
            }
            if (!ok || eval_F(x, c).norm() > tol || !box.contains(x)) {
                ++out.diverged_seeds;
                continue;
            }
            bool dup = false;
            for (const Point& p : found) dup = dup || (p - x).norm() <= dedup;
            if (!dup) found.push_back(x);
        }
    }
    for (const Point& z : found) {
        ReducedZero r;
        r.xi = z;
        r.residual = eval_F(z, c).norm();
        const auto cl = classify(c, z);
        r.hessian_eigs = cl.eigs;
        r.type = cl.type;
        double radius = 0.1;
        for (const Point& other : found)
            if (!(other == z)) radius = std::min(radius, 0.4 * (other - z).norm());
        try {
            r.degree = brouwer_degree(c, z, radius);
        } catch (const DegreeUndefinedError&) {
            r.degree = 0;
        }
        r.stable = r.degree != 0;
        out.zeros.push_back(r);
    }
    return out;
}

}  // namespace liouville
