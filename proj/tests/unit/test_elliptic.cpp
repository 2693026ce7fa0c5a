#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "liouville/elliptic.hpp"

using namespace liouville;

namespace {

double radial_exact_delta(double lambda) {
    // small root of lambda/4 = 8 d^2 / (1 + d^2)^2, i.e. s = d^2 solves s/(1+s)^2 = lambda/32
    const double k = lambda / 32;
    const double a = 1.0 / k - 2.0;
    return std::sqrt((a - std::sqrt(a * a - 4)) / 2);
}

}  // namespace

TEST(Poisson, ConstantRhsGivesParaboloid) {
    double prev = 0;
    for (int n : {32, 64, 128}) {
        auto g = DiskGrid::uniform(n, 16);
        const DiskField u = solve_poisson(DiskField(g, 4.0));
        double err = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 16; ++j) err = std::max(err, std::fabs(u(i, j) - (1 - g->r(i) * g->r(i))));
        if (prev > 0) EXPECT_NEAR(std::log2(prev / err), 2.0, 0.15) << n;
        prev = err;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Poisson, ZeroRhsAndMaximumPrinciple) {
    auto g = DiskGrid::clustered(48, 32, 0.05);
    EXPECT_EQ(solve_poisson(DiskField(g, 0.0)).max_abs(), 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    DiskField f(g);
    for (double& v : f.values) v = U(rng);
    const DiskField u = solve_poisson(f);
    for (double v : u.values) EXPECT_GT(v, 0.0);
}

TEST(Poisson, OperatorSymmetricAndInverse) {
    auto g = DiskGrid::clustered(40, 24, 0.01);
    PolarLaplacian A(g);
    const Vec x = seeded_vector(A.size(), 1), y = seeded_vector(A.size(), 2);
    EXPECT_NEAR(x.dot(A.apply(y)), y.dot(A.apply(x)), 1e-10 * std::fabs(x.dot(A.apply(y))) + 1e-10);
    EXPECT_GT(A.energy(x), 0.0);
    EXPECT_LT((A.solve(A.apply(x)) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Poisson, BubbleLaplacianReproducesProjection) {
    const BubbleParams p{1.0, {0.2, -0.1}, 0.1, 0.1};
    auto g = DiskGrid::uniform(256, 256);
    const DiskField rhs = DiskField::sample(g, [&](Point x) { return bubble_expW(p, x); });
    const DiskField u = solve_poisson(rhs);
    const DiskField pw = project_W_exact(p, g);
    double err = 0;
    for (std::size_t k = 0; k < u.values.size(); ++k) err = std::max(err, std::fabs(u.values[k] - pw.values[k]));
    EXPECT_LT(err, 5e-3);
}

TEST(Gmres, SolvesSmallNonsymmetricSystem) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(50, 50);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0, 0.1);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) M(i, j) += N(rng) / 5;
    const Vec b = seeded_vector(50);
    const auto r = gmres([&](const Vec& x) -> Vec { return M * x; }, b, 1e-13, 10, 500);
    EXPECT_TRUE(r.converged);
    EXPECT_LT((M * r.x - b).norm(), 1e-11);
}

TEST(Newton, RadialFixtureConstantPotential) {
    const double lambda = 1e-2;
    const PotentialCoeffs c = PotentialCoeffs::constant();
    SolveConfig cfg;
    cfg.lambda = lambda;
    cfg.b = Point{0, 0};
    cfg.n_r = 256;
    cfg.n_theta = 16;
    const SolveResult r = newton_solve(cfg, c);
    ASSERT_TRUE(r.converged) << r.message;
    EXPECT_LE(r.iterations, 8);
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_TRUE(r.certificate.ok) << r.certificate.max_ratio;
    const double dh = radial_exact_delta(lambda);
    const BubbleParams ex{lambda, {0, 0}, dh, dh};
    double err = 0;
    for (std::size_t k = 0; k < r.w.values.size(); ++k) {
        const double exact = bubble_W(ex, r.w.grid->point(k)) + std::log(4 / lambda);
        err = std::max(err, std::fabs(r.w.values[k] - exact));
    }
    EXPECT_LT(err, 1e-5);
}

TEST(Newton, MinimalBranchForSmallLambda) {
    SolveConfig cfg;
    cfg.lambda = 1e-6;
    cfg.n_r = 32;
    cfg.n_theta = 32;
    const SolveResult r = newton_solve(cfg, PotentialCoeffs::example());
    ASSERT_TRUE(r.converged);
    EXPECT_LT(r.w.max_abs(), cfg.lambda);
    EXPECT_GT(r.w.max_abs(), 0.0);
}

TEST(Newton, QuadraticCertificateLogic) {
    EXPECT_TRUE(quadratic_certificate({1.0, 1e-2, 1e-4, 1e-8, 1e-15}).ok);
    EXPECT_FALSE(quadratic_certificate({1e-2, 5e-3, 2.5e-3, 1.2e-3}).ok);
    EXPECT_FALSE(quadratic_certificate({1.0}).ok);
}

TEST(Spectrum, DirichletEigenvalueAtZeroLambda) {
    const double j01 = 2.404825557695773;
    auto A = make_laplacian(DiskGrid::uniform(96, 16));
    const Background bg = Background::plain(1e-300, {}, A);
    const double mu = linearized_min_sv(LinearizedOperator(bg, Vec::Zero(A->size())), false, SpectrumMetric::l2);
    EXPECT_NEAR(mu, j01 * j01, 2e-3);
}

TEST(Spectrum, RestrictionRemovesTranslationNearKernel) {
    const PotentialCoeffs c = PotentialCoeffs::example();
    const double delta = 1e-2;
    auto A = make_laplacian(DiskGrid::clustered(96, 64, delta));
    const Background bg = Background::bubble(BubbleAnsatz(BubbleParams::from_delta(delta, {0, 0}, c), c), A);
    const Vec zero = Vec::Zero(A->size());
    const double full = linearized_min_sv_h1(bg, zero, false);
    const double restricted = linearized_min_sv_h1(bg, zero, true);
    EXPECT_LT(full * 100, restricted);
    EXPECT_GT(restricted * std::log(1 / delta), 0.2);
    EXPECT_LT(restricted * std::log(1 / delta), 3.0);
}

TEST(Projected, ConstraintAndResidual) {
    const PotentialCoeffs c = PotentialCoeffs::example();
    const double delta = 1e-3;
    const Point b{2e-3, -1.5e-3};
    auto A = make_laplacian(DiskGrid::clustered(128, 128, delta));
    const Background bg = Background::bubble(BubbleAnsatz(BubbleParams::from_delta(delta, b, c), c), A);
    const KernelSpace K(bg);
    EXPECT_NEAR(K.G(0, 0), 2 * std::numbers::pi / 3, 0.05 * 2 * std::numbers::pi / 3);
    const ProjectedResult r = projected_solve(bg, K, Vec::Zero(A->size()));
    ASSERT_TRUE(r.converged) << r.message;
    const Eigen::Vector2d m = K.moments(r.phi);
    EXPECT_LT(m.cwiseAbs().maxCoeff(), 1e-10 * r.phi_h1 * std::sqrt(K.G.norm()) + 1e-14);
    EXPECT_LT(r.phi_h1, 0.05);
}

TEST(PullBack, EvenAndMassConsistent) {
    const PotentialCoeffs c = PotentialCoeffs::example();
    const double lambda = 1e-3;
    const Point b{0.02, -0.015};
    auto A = make_laplacian(DiskGrid::clustered(192, 128, delta_of(lambda, {0, 0}, c)));
    const Background bg = Background::bubble(lambda, b, c, A);
    const DiskField w = to_field(bg.grid, bg.base);
    const DiskField u = pull_back(w);
    const int n = u.grid->n_theta();
    double odd = 0;
    for (int i = 0; i < u.grid->n_r(); ++i)
        for (int j = 0; j < n / 2; ++j) odd = std::max(odd, std::fabs(u(i, j) - u(i, j + n / 2)));
    EXPECT_EQ(odd, 0.0);
    EXPECT_NEAR(u(3, 5), w(3, 5) + 2 * std::log(std::sqrt(w.grid->r(3))), 1e-14);
    const MassReport m = mass_identity(w, lambda, c);
    EXPECT_NEAR(m.x_side / m.y_side, 1.0, 1e-3);
    EXPECT_NEAR(m.y_side / (16 * std::numbers::pi), 1.0, 0.05);
}
