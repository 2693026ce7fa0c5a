#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace liouville {

// Point of the plane. Disk membership is checked by the operations that need it.
struct Point {
    double x1 = 0.0;
    double x2 = 0.0;

    constexpr Point() = default;
    constexpr Point(double a, double b) : x1(a), x2(b) {}
    explicit Point(std::complex<double> z) : x1(z.real()), x2(z.imag()) {}

    std::complex<double> complex() const { return {x1, x2}; }
    double norm2() const { return x1 * x1 + x2 * x2; }
    double norm() const { return std::hypot(x1, x2); }
    double operator[](int i) const { return i == 0 ? x1 : x2; }

    friend constexpr Point operator+(Point a, Point b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend constexpr Point operator-(Point a) { return {-a.x1, -a.x2}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x1, s * a.x2}; }
    friend constexpr Point operator*(Point a, double s) { return {s * a.x1, s * a.x2}; }
    friend constexpr Point operator/(Point a, double s) { return {a.x1 / s, a.x2 / s}; }
    friend constexpr double dot(Point a, Point b) { return a.x1 * b.x1 + a.x2 * b.x2; }
    friend constexpr bool operator==(Point, Point) = default;
};

inline Point polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

class CoincidentPointsError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kCoincidentFloor = 1e-14;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace detail {
inline void require_closed_disk(Point x, const char* what) {
    if (!(x.norm2() <= 1.0 + 1e-12)) throw std::domain_error(std::string(what) + ": point outside the closed unit disk");
}
}  // namespace detail

// Regular part of the Dirichlet Green's function, H(x,y) = (1/4pi) log(1 + |x|^2|y|^2 - 2 x.y).
inline double green_regular(Point x, Point y) {
    if (!std::isfinite(x.x1) || !std::isfinite(x.x2) || !std::isfinite(y.x1) || !std::isfinite(y.x2))
        throw std::domain_error("green_regular: non-finite input");
    return std::log1p(x.norm2() * y.norm2() - 2.0 * dot(x, y)) / (4.0 * std::numbers::pi);
}

inline double green(Point x, Point y) {
    detail::require_closed_disk(x, "green");
    detail::require_closed_disk(y, "green");
    const double d = (x - y).norm();
    if (d < kCoincidentFloor) throw CoincidentPointsError("green: coincident points");
    return -std::log(d) / kTwoPi + green_regular(x, y);
}

// Returns -infinity on the boundary circle.
inline double robin(Point x) {
    const double r2 = x.norm2();
    if (r2 > 1.0 + 1e-12) throw std::domain_error("robin: point outside the closed unit disk");
    if (r2 >= 1.0) return -std::numeric_limits<double>::infinity();
    return std::log1p(-r2) / kTwoPi;
}

inline Point fold_map(Point x, int alpha) {
    if (alpha < 1) throw std::invalid_argument("fold_map: alpha must be positive");
    std::complex<double> z = x.complex(), p = 1.0;
    for (int k = 0; k < alpha; ++k) p *= z;
    return Point(p);
}

inline std::vector<Point> unfold_roots(Point y, int alpha) {
    if (alpha < 1) throw std::invalid_argument("unfold_roots: alpha must be positive");
    std::vector<Point> out;
    out.reserve(alpha);
    const double r = y.norm();
    if (r == 0.0) return std::vector<Point>(alpha, Point{});
    const double rho = std::pow(r, 1.0 / alpha);
    const double th = std::atan2(y.x2, y.x1);
    for (int k = 0; k < alpha; ++k) out.push_back(polar(rho, (th + kTwoPi * k) / alpha));
    return out;
}

// Principal square root of y, used wherever V(y^{1/2}) is evaluated (V is even).
inline Point sqrt_point(Point y) { return Point(std::sqrt(y.complex())); }

}  // namespace liouville
