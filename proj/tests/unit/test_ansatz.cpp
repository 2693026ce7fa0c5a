#include <gtest/gtest.h>

#include <random>

#include "liouville/ansatz.hpp"
#include "liouville/quadrature.hpp"
#include "test_helpers.hpp"

using namespace liouville;

namespace {
double lap5(const std::function<double(Point)>& f, Point x, double h) {
    return (f(x + Point{h, 0}) + f(x - Point{h, 0}) + f(x + Point{0, h}) + f(x - Point{0, h}) - 4 * f(x)) / (h * h);
}
}  // namespace

TEST(Ansatz, DeltaCalibration) {
    const auto c = PotentialCoeffs::example();
    EXPECT_NEAR(delta_of(1e-3, {0, 0}, c), std::sqrt(1e-3 / 32), 1e-18);
    const Point b{0.1, -0.05};
    const auto p = BubbleParams::from_lambda(2e-3, b, c);
    const double s = 1 - b.norm2();
    EXPECT_NEAR(p.delta * p.delta / (2e-3 / 32 * eval_V_half(c, b) * std::pow(s, 4)), 1.0, 1e-14);
    EXPECT_EQ(p.mu_sq, p.delta);
    const auto q = BubbleParams::from_delta(p.delta, b, c);
    EXPECT_NEAR(q.lambda / p.lambda, 1.0, 1e-14);
    double prev = 0;
    for (double lam = 1e-6; lam < 1; lam *= 3) {
        const double d = delta_of(lam, b, c);
        EXPECT_GT(d, prev);
        prev = d;
    }
    // Small-b limit matches sqrt(lambda)/(4 sqrt 2).
    EXPECT_NEAR(delta_of(1e-4, {1e-6, 0}, c) / (std::sqrt(1e-4) / (4 * std::sqrt(2.0))), 1.0, 1e-10);
}

TEST(Ansatz, BubbleBasics) {
    const auto p = BubbleParams::from_delta(0.05, {0.1, 0.2}, {});
    EXPECT_NEAR(bubble_W(p, p.b), std::log(8 / (p.delta * p.delta)), 1e-13);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const Point x = p.b + testing_support::random_in_disk(rng, 0.3);
        const double h = 1e-3 * p.delta;
        const double res = -lap5([&](Point z) { return bubble_W(p, z); }, x, h) - bubble_expW(p, x);
        EXPECT_LT(std::fabs(res), 1e-3 * bubble_expW(p, p.b));
    }
}

TEST(Ansatz, QuantizationOnThePlane) {
    // e^W in z = (x-b)/delta is 8/(1+|z|^2)^2; the tail beyond R is 8 pi/(1+R^2).
    const double R = 1e4;
    auto spec = QuadratureSpec::plane(R, [R] { return 8 * std::numbers::pi / (1 + R * R); });
    spec.focus_scale = 1.0;
    spec.tol = 1e-13;
    const auto r = integrate(spec, [](Point z) { return 8 / std::pow(1 + z.norm2(), 2); });
    EXPECT_NEAR(r.value / (8 * std::numbers::pi), 1.0, 1e-12);
}

TEST(Ansatz, KernelFunctions) {
    const auto p = BubbleParams::from_delta(0.02, {0.05, -0.03}, {});
    EXPECT_NEAR(kernel_Z(0, p, p.b), 1.0, 1e-15);
    EXPECT_NEAR(kernel_Z(0, p, p.b + polar(p.delta, 0.7)), 0.0, 1e-14);
    std::mt19937_64 rng(21);
    for (int k = 0; k < 1000; ++k) {
        const Point x = testing_support::random_in_disk(rng, 1.0);
        EXPECT_LE(std::fabs(kernel_Z(1, p, x)), 0.5 + 1e-15);
        EXPECT_LE(std::fabs(kernel_Z(2, p, x)), 0.5 + 1e-15);
    }
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 20; ++k) {
            const Point x = p.b + testing_support::random_in_disk(rng, 5 * p.delta);
            const double h = 1e-3 * p.delta;
            const double res = -lap5([&](Point z) { return kernel_Z(j, p, z); }, x, h) - bubble_expW(p, x) * kernel_Z(j, p, x);
            EXPECT_LT(std::fabs(res), 1e-3 / (p.delta * p.delta));
        }
}

TEST(Ansatz, ExactProjectionVanishesOnBoundary) {
    for (Point b : {Point{0, 0}, Point{0.2, 0.1}, Point{-0.05, 0.3}}) {
        const auto p = BubbleParams::from_delta(0.03, b, PotentialCoeffs::example());
        const BubbleAnsatz a(p, PotentialCoeffs::example());
        for (int j = 0; j < 64; ++j) {
            const Point e = polar(1.0, kTwoPi * (j + 0.3) / 64);
            EXPECT_LE(std::fabs(a.PW(e)), 1e-10);
            for (int i = 0; i < 3; ++i) EXPECT_LE(std::fabs(a.PZ(i, e)), 1e-10);
        }
    }
}

TEST(Ansatz, ProjectionHasBubbleLaplacian) {
    const auto p = BubbleParams::from_delta(0.05, {0.1, -0.1}, {});
    const BubbleAnsatz a(p, {});
    std::mt19937_64 rng(4);
    for (int k = 0; k < 30; ++k) {
        const Point x = testing_support::random_in_disk(rng, 0.9);
        const double h = 1e-3 * std::min(p.delta, 1.0);
        const double res = -lap5([&](Point z) { return a.PW(z); }, x, h) - a.expW(x);
        EXPECT_LT(std::fabs(res), 1e-3 * a.expW(p.b));
        for (int j = 1; j < 3; ++j) {
            const double rz = -lap5([&](Point z) { return a.PZ(j, z); }, x, h) - a.expW(x) * a.Z(j, x);
            EXPECT_LT(std::fabs(rz), 1e-3 * a.expW(p.b));
        }
    }
}

TEST(Ansatz, ProjectionIdempotent) {
    // Projecting PW again: its boundary trace is ~0, so the harmonic correction is ~0.
    const auto p = BubbleParams::from_delta(0.04, {0.15, 0.05}, {});
    const BubbleAnsatz a(p, {});
    const auto h = HarmonicExtension::from_trace([&](double t) { return a.PW(polar(1, t)); }, 512, 1.0);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 100; ++k) EXPECT_LE(std::fabs(h(testing_support::random_in_disk(rng))), 1e-12);
}

TEST(Ansatz, ExpansionValueAtCentre) {
    const auto p = BubbleParams::from_delta(0.01, {0.1, 0.05}, {});
    const double expect = -4 * std::log(p.delta) + 8 * std::numbers::pi * robin(p.b) + 2 * p.delta * p.delta;
    EXPECT_NEAR(project_W_expansion(p, p.b), expect, 1e-12);
    const auto p0 = BubbleParams::from_delta(0.01, {0, 0}, {});
    const double d2 = 1e-4;
    EXPECT_NEAR(project_W_expansion(p0, {1, 0}), 2 * d2 - 2 * std::log1p(d2), 1e-16);
}

TEST(Ansatz, ExpansionErrorRate) {
    // sup |PW - expansion| = O(delta^2 |b| + delta^4).
    const Point b{0.1, -0.05};
    std::vector<std::pair<double, double>> samples;
    for (double d : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
        const auto p = BubbleParams::from_delta(d, b, {});
        const BubbleAnsatz a(p, {});
        double worst = 0;
        for (int i = 1; i <= 20; ++i)
            for (int j = 0; j < 32; ++j) {
                const Point x = polar(0.05 * i, kTwoPi * j / 32);
                worst = std::max(worst, std::fabs(a.PW(x) - project_W_expansion(p, x)));
            }
        samples.push_back({d, worst});
    }
    const auto fit = rate_fit(samples);
    EXPECT_NEAR(fit.exponent, 2.0, 0.1);
}

TEST(Ansatz, ProjectedZRates) {
    std::vector<std::pair<double, double>> refined, first;
    for (double d : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3}) {
        const auto p = BubbleParams::from_delta(d, {0, 0}, {});
        const BubbleAnsatz a(p, {});
        double wr = 0, wf = 0;
        for (int i = 0; i <= 20; ++i)
            for (int j = 0; j < 32; ++j) {
                const Point x = polar(0.05 * i, kTwoPi * j / 32 + 0.1);
                wr = std::max(wr, std::fabs(a.PZ(1, x) - a.PZ(1, x, ProjectionMode::refined)));
                wf = std::max(wf, std::fabs(a.PZ(1, x) - a.PZ(1, x, ProjectionMode::first_order)));
            }
        refined.push_back({d, wr});
        first.push_back({d, wf});
    }
    EXPECT_GE(rate_fit(refined).exponent, 2.9);
    EXPECT_NEAR(rate_fit(first).exponent, 1.0, 0.05);
}

TEST(Ansatz, ResidualForConstantPotentialAtOrigin) {
    // V = 1, b = 0: R = ((1 + delta^2)^2 - 1) e^W exactly.
    const auto p = BubbleParams::from_lambda(1e-3, {0, 0}, {});
    const BubbleAnsatz a(p, {});
    const double d2 = p.delta * p.delta;
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        const Point x = testing_support::random_in_disk(rng, 1.0);
        EXPECT_NEAR(a.residual(x) / a.expW(x), (1 + d2) * (1 + d2) - 1, 1e-15);
    }
    // Pointwise definition: (lambda/4) V e^{PW} - e^W.
    const auto c = PotentialCoeffs::example();
    const auto q = BubbleParams::from_lambda(1e-3, {0.01, -0.02}, c);
    const BubbleAnsatz b(q, c);
    for (int k = 0; k < 200; ++k) {
        const Point x = testing_support::random_in_disk(rng, 1.0);
        const double direct = q.lambda / 4 * eval_V_half(c, x, HalfMode::root) * std::exp(b.PW(x)) - b.expW(x);
        EXPECT_NEAR(b.residual(x), direct, 1e-9 * b.expW(x) + 1e-12);
    }
}
