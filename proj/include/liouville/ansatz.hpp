#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "disk_grid.hpp"
#include "geometry.hpp"
#include "harmonic.hpp"
#include "potential.hpp"

namespace liouville {

inline double delta_of(double lambda, Point b, const PotentialCoeffs& c) {
    if (!(lambda > 0)) throw std::domain_error("delta_of: lambda must be positive");
    if (!(b.norm2() < 1)) throw std::domain_error("delta_of: |b| must be < 1");
    const double s = 1 - b.norm2();
    return std::sqrt(lambda / 32 * eval_V_half(c, b) * s * s * s * s);
}

struct BubbleParams {
    double lambda = 0;
    Point b;
    double delta = 0;
    double mu_sq = 0;  // equals delta

    static BubbleParams from_lambda(double lambda, Point b, const PotentialCoeffs& c) {
        const double d = delta_of(lambda, b, c);
        return {lambda, b, d, d};
    }
    // Inverse calibration: the lambda giving scale delta at centre b.
    static BubbleParams from_delta(double delta, Point b, const PotentialCoeffs& c) {
        if (!(delta > 0)) throw std::domain_error("BubbleParams: delta must be positive");
        if (!(b.norm2() < 1)) throw std::domain_error("BubbleParams: |b| must be < 1");
        const double s = 1 - b.norm2();
        const double lambda = 32 * delta * delta / (eval_V_half(c, b) * s * s * s * s);
        return {lambda, b, delta, delta};
    }
};

inline double bubble_W(const BubbleParams& p, Point x) {
    const double d2 = p.delta * p.delta;
    return std::log(8 * d2) - 2 * std::log(d2 + (x - p.b).norm2());
}

inline double bubble_expW(const BubbleParams& p, Point x) {
    const double d2 = p.delta * p.delta;
    const double q = d2 + (x - p.b).norm2();
    return 8 * d2 / (q * q);
}

inline double kernel_Z(int j, const BubbleParams& p, Point x) {
    const double d2 = p.delta * p.delta;
    const Point y = x - p.b;
    const double q = d2 + y.norm2();
    switch (j) {
        case 0: return (d2 - y.norm2()) / q;
        case 1: return p.delta * y.x1 / q;
        case 2: return p.delta * y.x2 / q;
    }
    throw std::invalid_argument("kernel_Z: j must be 0, 1 or 2");
}

inline double project_W_expansion(const BubbleParams& p, Point x) {
    const double d2 = p.delta * p.delta;
    return -2 * std::log(d2 + (x - p.b).norm2()) + 8 * std::numbers::pi * green_regular(x, p.b) + 2 * d2;
}

enum class ProjectionMode { exact, first_order, refined };

// The bubble at fixed (delta, b) together with the harmonic corrections that produce the
// Dirichlet projections PW, PZ^0, PZ^1, PZ^2.
class BubbleAnsatz {
public:
    BubbleAnsatz(BubbleParams p, PotentialCoeffs c, int n_boundary = 512) : p_(p), c_(std::move(c)) {
        if (!(p_.b.norm2() < 1)) throw std::domain_error("BubbleAnsatz: |b| must be < 1");
        const double d2 = p_.delta * p_.delta;
        const Point b = p_.b;
        // W on the circle is log(8 d2) - 8 pi H(.,b) - 2 log1p(d2/|e-b|^2); the first two
        // pieces extend exactly, only the last needs the Fourier extension.
        g_ = HarmonicExtension::from_trace(
            [&](double t) { return 2 * std::log1p(d2 / (polar(1, t) - b).norm2()); }, n_boundary);
        for (int j = 0; j < 3; ++j)
            z_[j] = HarmonicExtension::from_trace([&, j](double t) { return kernel_Z(j, p_, polar(1, t)); }, n_boundary);
    }

    const BubbleParams& params() const { return p_; }
    const PotentialCoeffs& coeffs() const { return c_; }

    double W(Point x) const { return bubble_W(p_, x); }
    double expW(Point x) const { return bubble_expW(p_, x); }
    double boundary_correction(Point x) const { return g_(x); }

    double PW(Point x) const {
        const double d2 = p_.delta * p_.delta;
        return -2 * std::log(d2 + (x - p_.b).norm2()) + 8 * std::numbers::pi * green_regular(x, p_.b) + g_(x);
    }

    // E with (lambda/4) V(x^{1/2}) e^{PW} = e^W e^E, written so that E is accurate near 0.
    double exponent(Point x) const {
        const Point b = p_.b;
        return log_V_half(c_, x) - log_V_half(c_, b) + 2 * std::log1p(x.norm2() * b.norm2() - 2 * dot(x, b)) -
               4 * std::log1p(-b.norm2()) + g_(x);
    }

    double residual(Point x) const { return expW(x) * std::expm1(exponent(x)); }

    double Z(int j, Point x) const { return kernel_Z(j, p_, x); }

    double PZ(int j, Point x, ProjectionMode mode = ProjectionMode::exact) const {
        const double z = kernel_Z(j, p_, x);
        switch (mode) {
            case ProjectionMode::exact: return z - z_.at(j)(x);
            case ProjectionMode::first_order: return z;
            case ProjectionMode::refined:
                if (j == 0) return z - z_.at(0)(x);
                return z - p_.delta * (x[j - 1] - p_.b[j - 1]);
        }
        return z;
    }

private:
    BubbleParams p_;
    PotentialCoeffs c_;
    HarmonicExtension g_;
    std::array<HarmonicExtension, 3> z_;
};

inline DiskField project_W_exact(const BubbleParams& p, GridPtr grid, const PotentialCoeffs& c = {}) {
    BubbleAnsatz a(p, c);
    return DiskField::sample(grid, [&](Point x) { return a.PW(x); });
}

inline double project_Z(int j, const BubbleParams& p, Point x, ProjectionMode mode = ProjectionMode::exact) {
    if (j != 1 && j != 2) throw std::invalid_argument("project_Z: j must be 1 or 2");
    if (mode == ProjectionMode::first_order) return kernel_Z(j, p, x);
    if (mode == ProjectionMode::refined) return kernel_Z(j, p, x) - p.delta * (x[j - 1] - p.b[j - 1]);
    return BubbleAnsatz(p, {}).PZ(j, x);
}

inline double residual_R(const BubbleParams& p, const PotentialCoeffs& c, Point x) {
    return BubbleAnsatz(p, c).residual(x);
}

}  // namespace liouville
