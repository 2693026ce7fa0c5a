#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "liouville/harness.hpp"

using namespace liouville;

TEST(BubbleFit, RecoversProjectedBubble) {
    const PotentialCoeffs c = PotentialCoeffs::example();
    const BubbleParams p = BubbleParams::from_delta(2e-3, {0.01, -0.004}, c);
    auto g = DiskGrid::clustered(128, 64, p.delta, p.b);
    const BubbleAnsatz a(p, c);
    const DiskField w = DiskField::sample(g, [&](Point x) { return a.PW(x) + 0.3; });
    const BubbleFit f = fit_bubble(w);
    EXPECT_NEAR(f.params.delta / p.delta, 1.0, 1e-6);
    EXPECT_NEAR((f.params.b - p.b).norm() / p.delta, 0.0, 1e-6);
    EXPECT_NEAR(f.constant, 0.3, 1e-6);
    EXPECT_FALSE(f.low_confidence);
}

TEST(Census, TwoAntipodalMaximaForShiftedBubble) {
    const PotentialCoeffs c = PotentialCoeffs::example();
    const double lambda = 1e-3;
    const Point b{0.02, -0.015};
    auto A = make_laplacian(DiskGrid::clustered(192, 128, delta_of(lambda, {0, 0}, c)));
    const Background bg = Background::bubble(lambda, b, c, A);
    const MaximaCensus m = maxima_census(pull_back(to_field(bg.grid, bg.base)), lambda, c);
    ASSERT_EQ(m.count, 2);
    EXPECT_TRUE(m.antipodal);
    const double r = std::sqrt(b.norm());
    EXPECT_NEAR(m.locations[0].norm(), r, 3 * m.spacing);
}

TEST(Census, RadialBubbleIsFlagged) {
    const PotentialCoeffs c = PotentialCoeffs::constant();
    const double lambda = 1e-2;
    auto A = make_laplacian(DiskGrid::clustered(128, 64, delta_of(lambda, {0, 0}, c)));
    const Background bg = Background::bubble(lambda, {0, 0}, c, A);
    const MaximaCensus m = maxima_census(pull_back(to_field(bg.grid, bg.base)), lambda, c);
    EXPECT_TRUE(m.radial) << m.count;
    EXPECT_FALSE(m.antipodal);
}

TEST(Scaling, ReportsTrendsOnSyntheticRows) {
    SweepResult s;
    const Point xi0{1.0, -1.0};
    for (int k = 0; k < 5; ++k) {
        SweepRow r;
        r.lambda = 1e-3 / std::pow(2, k);
        r.delta = 1e-2 / std::pow(2, k);
        r.converged = true;
        const double sc = r.delta * std::sqrt(std::log(1 / r.delta));
        const double e = 0.2 / (k + 1);
        r.b_fit = Point{(1 + e) * sc, -sc};
        r.mass = 16 * std::numbers::pi * (1 + e / 10);
        s.rows.push_back(r);
    }
    const ScalingReport rep = scaling_check(s, xi0);
    EXPECT_TRUE(rep.error_decreasing);
    EXPECT_NEAR(rep.terminal_error, 0.04 / std::sqrt(2.0), 1e-12);
    EXPECT_TRUE(rep.delta_over_b_decreasing);
    EXPECT_EQ(rep.first_decreasing_row, 0);
    EXPECT_TRUE(mass_check(s).within_5_percent);
    s.rows.resize(3);
    EXPECT_THROW(scaling_check(s, xi0), std::runtime_error);
}

TEST(Branch, MultiplierZeroTracksReducedField) {
    const PotentialCoeffs c = PotentialCoeffs::example();
    const std::optional<Point> xi0 = reduced_target(c);
    ASSERT_TRUE(xi0.has_value());
    const double lambda = 3.125e-4;
    const MultiplierMap map(lambda, c, 128, 128, NewtonOptions{});
    const BranchPoint bp = find_branch(map, Eigen::Vector2d(xi0->x1, xi0->x2), BranchOptions{}, Vec());
    ASSERT_TRUE(bp.converged) << bp.message;
    // continuum zero of the projected multiplier at this delta
    EXPECT_NEAR(bp.xi(0), 0.797, 0.03);
    EXPECT_NEAR(bp.xi(1), -1.288, 0.03);
}
