#include <gtest/gtest.h>

#include <random>

#include "liouville/geometry.hpp"
#include "test_helpers.hpp"

using namespace liouville;

TEST(Geometry, GreenSymmetricOnRandomPairs) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 1000; ++k) {
        const Point x = testing_support::random_in_disk(rng), y = testing_support::random_in_disk(rng);
        EXPECT_NEAR(green(x, y), green(y, x), 1e-13);
        EXPECT_NEAR(green_regular(x, y), green_regular(y, x), 1e-13);
    }
}

TEST(Geometry, GreenVanishesOnBoundary) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const Point y = testing_support::random_in_disk(rng, 0.95);
        const Point x = polar(1.0, 0.37 * k);
        EXPECT_NEAR(green(x, y), 0.0, 1e-14);
        EXPECT_NEAR(green_regular(x, y), std::log((x - y).norm()) / kTwoPi, 1e-14);
    }
}

TEST(Geometry, GreenMatchesPoissonKernelRepresentation) {
    // H(x, .) is the harmonic function with boundary values (1/2pi) log|x - e|.
    const Point x{0.5, 0.0};
    for (Point y : {Point{0, 0}, Point{0.2, -0.3}, Point{-0.6, 0.1}}) {
        const int n = 4096;
        double h = 0;
        for (int j = 0; j < n; ++j) {
            const Point e = polar(1.0, kTwoPi * j / n);
            const double poisson = (1 - y.norm2()) / (e - y).norm2() / kTwoPi;
            h += poisson * std::log((x - e).norm()) / kTwoPi * (kTwoPi / n);
        }
        EXPECT_NEAR(green(x, y), -std::log((x - y).norm()) / kTwoPi + h, 1e-12);
    }
    EXPECT_NEAR(green(Point{0.5, 0}, Point{0, 0}), std::log(2.0) / kTwoPi, 1e-15);
}

TEST(Geometry, RegularPartDiagonalIsRobin) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 100; ++k) {
        const Point x = testing_support::random_in_disk(rng, 0.99);
        EXPECT_NEAR(green_regular(x, x), std::log(1 - x.norm2()) / kTwoPi, 1e-13);
    }
    EXPECT_EQ(green_regular({0, 0}, {0, 0}), 0.0);
}

TEST(Geometry, RegularPartDiscretelyHarmonic) {
    std::mt19937_64 rng(5);
    const double h = 1e-3;
    for (int k = 0; k < 50; ++k) {
        const Point b = testing_support::random_in_disk(rng, 0.5);
        const Point x = testing_support::random_in_disk(rng, 0.8);
        const double lap = (green_regular(x + Point{h, 0}, b) + green_regular(x - Point{h, 0}, b) +
                            green_regular(x + Point{0, h}, b) + green_regular(x - Point{0, h}, b) -
                            4 * green_regular(x, b)) / (h * h);
        EXPECT_LT(std::fabs(lap), 1e-3);
    }
}

TEST(Geometry, CoincidentPointsRejected) {
    EXPECT_THROW(green({0.1, 0.2}, {0.1, 0.2}), CoincidentPointsError);
}

TEST(Geometry, RobinValues) {
    EXPECT_EQ(robin({0, 0}), 0.0);
    EXPECT_NEAR(robin({0.5, 0}), std::log(0.75) / kTwoPi, 1e-16);
    EXPECT_NEAR(robin({0.5, 0}), -0.045786, 1e-5);
    EXPECT_EQ(robin({0.3, -0.2}), robin({-0.3, 0.2}));
    EXPECT_TRUE(std::isinf(robin({1, 0})));
    EXPECT_LT(robin({1, 0}), 0);
}

TEST(Geometry, RobinMaximumUniqueAtOrigin) {
    double best = -1e300;
    int count = 0;
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 41; ++j) {
            const Point x{-1 + i * 0.05, -1 + j * 0.05};
            if (x.norm2() >= 1) continue;
            const double v = robin(x);
            if (v > best) best = v, count = 1;
            else if (v == best) ++count;
        }
    EXPECT_EQ(best, 0.0);
    EXPECT_EQ(count, 1);
}

TEST(Geometry, FoldMap) {
    const Point p = fold_map({0, 1}, 2);
    EXPECT_NEAR(p.x1, -1, 1e-15);
    EXPECT_NEAR(p.x2, 0, 1e-15);
    EXPECT_EQ(fold_map({0, 0}, 3), Point(0, 0));
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const Point x = testing_support::random_in_disk(rng);
        EXPECT_NEAR(fold_map(x, 2).norm(), x.norm2(), 1e-15);
    }
}

TEST(Geometry, UnfoldRoots) {
    auto r = unfold_roots({-1, 0}, 2);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].x1, 0, 1e-15);
    EXPECT_NEAR(std::fabs(r[0].x2), 1, 1e-15);
    EXPECT_NEAR(r[0].x2 + r[1].x2, 0, 1e-15);
    r = unfold_roots({1, 0}, 2);
    EXPECT_NEAR(r[0].x1, 1, 1e-15);
    EXPECT_NEAR(r[1].x1, -1, 1e-15);
    EXPECT_EQ(unfold_roots({0, 0}, 3).size(), 3u);
    std::mt19937_64 rng(2);
    for (int alpha = 1; alpha <= 4; ++alpha)
        for (int k = 0; k < 100; ++k) {
            const Point y = testing_support::random_in_disk(rng);
            const auto roots = unfold_roots(y, alpha);
            for (std::size_t a = 0; a < roots.size(); ++a) {
                EXPECT_NEAR((fold_map(roots[a], alpha) - y).norm(), 0.0, 1e-14);
                for (std::size_t b = a + 1; b < roots.size(); ++b) EXPECT_GT((roots[a] - roots[b]).norm(), 1e-6);
            }
        }
}
