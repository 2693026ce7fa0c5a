#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/minima.hpp>
#include <Eigen/Dense>

#include "ansatz.hpp"
#include "geometry.hpp"
#include "harmonic.hpp"
#include "parallel.hpp"

namespace liouville {

// Gauss-Legendre rule on [-1,1], nodes ascending.
struct GaussRule {
    std::vector<double> x, w;
};

inline const GaussRule& gauss_legendre(int n) {
    static std::mutex m;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule g;
    const auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative zeros, ascending
    std::vector<std::pair<double, double>> nw;
    for (double z : zeros) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double w = 2.0 / ((1 - z * z) * dp * dp);
        nw.push_back({z, w});
        if (z != 0.0) nw.push_back({-z, w});
    }
    std::sort(nw.begin(), nw.end());
    for (auto [z, w] : nw) {
        g.x.push_back(z);
        g.w.push_back(w);
    }
    return cache.emplace(n, std::move(g)).first->second;
}

enum class DomainKind { disk, annulus, plane };
enum class QuadRule { tensor, adaptive };

struct QuadratureSpec {
    DomainKind domain = DomainKind::disk;
    double r1 = 0.0, r2 = 1.0;  // annulus radii; disk/plane use r2 as the outer radius
    int n_r = 16;               // Gauss nodes per radial panel
    int n_theta = 64;
    QuadRule rule = QuadRule::adaptive;
    double tol = 1e-10;
    Point focus{0, 0};           // radial panels are centred here (disk and plane only)
    double focus_scale = 0.0;    // innermost panel width; 0 means no grading
    double panel_ratio = 4.0;
    int max_doublings = 6;
    std::function<double()> tail;  // analytic contribution beyond r2 for plane domains

    static QuadratureSpec disk(double radius = 1.0) {
        QuadratureSpec s;
        s.r2 = radius;
        return s;
    }
    static QuadratureSpec annulus(double a, double b) {
        QuadratureSpec s;
        s.domain = DomainKind::annulus;
        s.r1 = a;
        s.r2 = b;
        return s;
    }
    static QuadratureSpec plane(double R, std::function<double()> tail = {}) {
        QuadratureSpec s;
        s.domain = DomainKind::plane;
        s.r2 = R;
        s.tail = std::move(tail);
        return s;
    }
    static QuadratureSpec focused(Point b, double scale, double radius = 1.0) {
        QuadratureSpec s = disk(radius);
        s.focus = b;
        s.focus_scale = scale;
        return s;
    }

    void validate() const {
        if (n_r < 8 || n_theta < 8) throw std::invalid_argument("QuadratureSpec: n_r, n_theta must be >= 8");
        if (!(tol > 0 && tol <= 1e-2)) throw std::invalid_argument("QuadratureSpec: tol must lie in (0, 1e-2]");
        if (domain == DomainKind::annulus && !(r1 >= 0 && r1 < r2)) throw std::invalid_argument("QuadratureSpec: bad annulus");
        if (domain != DomainKind::annulus && !(focus.norm() < r2)) throw std::invalid_argument("QuadratureSpec: focus outside domain");
    }
};

struct QuadResult {
    double value = 0;
    double error = 0;      // |I(2n) - I(n)|
    double abs_scale = 0;  // integral of |f|
    long evaluations = 0;
};

namespace detail {

// Radial breakpoints 0 (or r_in), s, s q, s q^2, ... < r_out, r_out.
inline std::vector<double> radial_breaks(double r_in, double r_out, double s, double q) {
    std::vector<double> br{r_in};
    if (s > 0) {
        for (double t = std::max(s, r_in * q); t < r_out * (1 - 1e-12); t *= q)
            if (t > br.back()) br.push_back(t);
    }
    br.push_back(r_out);
    return br;
}

inline QuadResult tensor_rule(const QuadratureSpec& spec, const std::function<double(Point)>& f, int n_r, int n_theta) {
    const GaussRule& g = gauss_legendre(n_r);
    const double dth = kTwoPi / n_theta;
    std::vector<double> per_theta(n_theta), per_theta_abs(n_theta);
    std::vector<long> evals(n_theta);
    parallel_for(static_cast<std::size_t>(n_theta), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        const double th = dth * j;
        const Point e{std::cos(th), std::sin(th)};
        double r_in = 0, r_out = spec.r2;
        Point c{0, 0};
        if (spec.domain == DomainKind::annulus) {
            r_in = spec.r1;
        } else {
            c = spec.focus;
            const double be = dot(c, e);
            r_out = -be + std::sqrt(be * be + spec.r2 * spec.r2 - c.norm2());
        }
        const auto br = radial_breaks(r_in, r_out, spec.focus_scale, spec.panel_ratio);
        std::vector<double> terms, abs_terms;
        terms.reserve(br.size() * n_r);
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], b = br[p + 1], h = 0.5 * (b - a), m = 0.5 * (a + b);
            for (int k = 0; k < n_r; ++k) {
                const double rho = m + h * g.x[k];
                const double v = f(c + rho * e) * rho * h * g.w[k];
                terms.push_back(v);
                abs_terms.push_back(std::fabs(v));
            }
        }
        per_theta[j] = pairwise_sum(terms) * dth;
        per_theta_abs[j] = pairwise_sum(abs_terms) * dth;
        evals[j] = static_cast<long>(terms.size());
    });
    QuadResult r;
    r.value = pairwise_sum(per_theta);
    r.abs_scale = pairwise_sum(per_theta_abs);
    for (long e : evals) r.evaluations += e;
    return r;
}

}  // namespace detail

inline QuadResult integrate(const QuadratureSpec& spec, const std::function<double(Point)>& f) {
    spec.validate();
    QuadResult coarse = detail::tensor_rule(spec, f, spec.n_r, spec.n_theta);
    QuadResult fine = detail::tensor_rule(spec, f, 2 * spec.n_r, 2 * spec.n_theta);
    long evals = coarse.evaluations + fine.evaluations;
    auto err = [&] { return std::fabs(fine.value - coarse.value); };
    auto ok = [&] { return err() <= spec.tol * std::max(std::fabs(fine.value), 1e-3 * fine.abs_scale) || err() == 0.0; };
    int n_r = 2 * spec.n_r, n_t = 2 * spec.n_theta;
    if (spec.rule == QuadRule::adaptive) {
        for (int d = 0; d < spec.max_doublings && !ok(); ++d) {
            n_r *= 2;
            n_t *= 2;
            coarse = fine;
            fine = detail::tensor_rule(spec, f, n_r, n_t);
            evals += fine.evaluations;
        }
        if (!ok()) throw QuadratureError("integrate: tolerance not reached", fine.value, err());
    }
    QuadResult out = fine;
    out.error = err();
    out.evaluations = evals;
    if (spec.domain == DomainKind::plane && spec.tail) out.value += spec.tail();
    return out;
}

// Moments over |z| <= r of monomial/(1+|z|^2)^3, and the two whole-plane second moments.
enum class MomentKind { zi4, zi2zj2, zi3zj, zizj3, zi2_global_p3, zi2_global_p4 };

inline double kernel_moment_closed_form(MomentKind kind, double r) {
    constexpr double pi = std::numbers::pi;
    if (!(r > 0)) throw std::invalid_argument("kernel_moment_closed_form: r must be positive");
    const double u = 1 + r * r;
    switch (kind) {
        case MomentKind::zi4:
            return 3 * pi / 8 * std::log(u) + 3 * pi / 4 / u - 3 * pi / 16 / (u * u) - 9 * pi / 16;
        case MomentKind::zi2zj2:
            return pi / 8 * std::log(u) + pi / 4 / u - pi / 16 / (u * u) - 3 * pi / 16;
        case MomentKind::zi3zj:
        case MomentKind::zizj3: return 0.0;
        case MomentKind::zi2_global_p3: return pi / 4;
        case MomentKind::zi2_global_p4: return pi / 12;
    }
    throw std::invalid_argument("kernel_moment_closed_form: unknown kind");
}

inline double bubble_moment(const BubbleParams& p, int gamma, double tol = 1e-10) {
    if (gamma < 0 || gamma > 3) throw std::invalid_argument("bubble_moment: gamma must be 0..3");
    auto spec = QuadratureSpec::focused(p.b, p.delta);
    spec.tol = tol;
    return integrate(spec, [&](Point x) {
               const double r = (x - p.b).norm();
               return bubble_expW(p, x) * std::pow(r, gamma);
           }).value;
}

// Integral over the disk of R . PZ^i for the exact projections.
inline QuadResult reduced_projection_detail(const BubbleAnsatz& a, int i, double tol = 1e-9) {
    if (i != 1 && i != 2) throw std::invalid_argument("reduced_projection: i must be 1 or 2");
    auto spec = QuadratureSpec::focused(a.params().b, a.params().delta);
    spec.tol = tol;
    spec.n_theta = 128;
    return integrate(spec, [&](Point x) { return a.residual(x) * a.PZ(i, x); });
}

inline double reduced_projection(const BubbleParams& p, const PotentialCoeffs& c, int i, double tol = 1e-9) {
    return reduced_projection_detail(BubbleAnsatz(p, c), i, tol).value;
}

// Both sides of int |x|^{2(alpha-1)} f(x^alpha) dx = (1/alpha) int f(y) dy.
inline std::pair<double, double> fold_integral_check(const std::function<double(Point)>& f, int alpha, double tol = 1e-11) {
    if (alpha < 1) throw std::invalid_argument("fold_integral_check: alpha must be positive");
    auto spec = QuadratureSpec::disk();
    spec.tol = tol;
    spec.n_theta = 128;
    spec.focus_scale = 0.05;
    spec.panel_ratio = 2.0;
    const double lhs = integrate(spec, [&](Point x) {
                           return std::pow(x.norm2(), alpha - 1) * f(fold_map(x, alpha));
                       }).value;
    const double rhs = integrate(spec, f).value / alpha;
    return {lhs, rhs};
}

enum class RateModel { power, power_log };

struct RateFit {
    RateModel model = RateModel::power;
    double exponent = 0;
    double c = 0;   // power model constant
    double c1 = 0;  // power_log: c1 delta^a log(1/delta) + c2 delta^a
    double c2 = 0;
    double residual = 0;
    std::vector<std::pair<double, double>> used;
    int discarded = 0;
};

namespace detail {

inline RateFit fit_once(const std::vector<std::pair<double, double>>& v, RateModel model) {
    const int n = static_cast<int>(v.size());
    RateFit f;
    f.model = model;
    f.used = v;
    if (model == RateModel::power) {
        Eigen::MatrixXd A(n, 2);
        Eigen::VectorXd y(n);
        for (int k = 0; k < n; ++k) {
            A(k, 0) = 1.0;
            A(k, 1) = std::log(v[k].first);
            y(k) = std::log(std::fabs(v[k].second));
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < 2) throw std::domain_error("rate_fit: degenerate design matrix");
        const Eigen::VectorXd s = qr.solve(y);
        f.c = std::exp(s(0)) * (v[0].second < 0 ? -1 : 1);
        f.exponent = s(1);
        f.residual = std::sqrt((A * s - y).squaredNorm() / n);
        return f;
    }
    // For fixed a the constants solve a linear problem in relative error; a is found by Brent.
    auto solve_for = [&](double a, double& c1, double& c2) {
        Eigen::MatrixXd A(n, 2);
        Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
        for (int k = 0; k < n; ++k) {
            const double d = v[k].first, val = v[k].second;
            const double da = std::pow(d, a);
            A(k, 0) = da * std::log(1 / d) / val;
            A(k, 1) = da / val;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < 2) throw std::domain_error("rate_fit: degenerate design matrix");
        const Eigen::VectorXd s = qr.solve(y);
        c1 = s(0);
        c2 = s(1);
        return std::sqrt((A * s - y).squaredNorm() / n);
    };
    double best_a = 0, best_r = std::numeric_limits<double>::infinity();
    for (double a = -2.0; a <= 8.0; a += 0.05) {
        double c1, c2;
        const double r = solve_for(a, c1, c2);
        if (r < best_r) best_r = r, best_a = a;
    }
    auto obj = [&](double a) {
        double c1, c2;
        return solve_for(a, c1, c2);
    };
    const auto m = boost::math::tools::brent_find_minima(obj, best_a - 0.05, best_a + 0.05, 50);
    f.exponent = m.first;
    f.residual = solve_for(f.exponent, f.c1, f.c2);
    return f;
}

}  // namespace detail

// Least-squares rate fit; the largest-delta sample is dropped while the residual exceeds 1e-2.
inline RateFit rate_fit(std::vector<std::pair<double, double>> values, RateModel model = RateModel::power) {
    if (values.size() < 4) throw std::invalid_argument("rate_fit: need at least 4 samples");
    for (std::size_t k = 1; k < values.size(); ++k)
        if (!(values[k].first < values[k - 1].first)) throw std::invalid_argument("rate_fit: delta must be decreasing");
    for (const auto& [d, v] : values)
        if (!(d > 0) || !std::isfinite(v) || v == 0) throw std::invalid_argument("rate_fit: invalid sample");
    RateFit fit = detail::fit_once(values, model);
    int discarded = 0;
    while (fit.residual > 1e-2 && values.size() > 4) {
        values.erase(values.begin());
        ++discarded;
        fit = detail::fit_once(values, model);
    }
    fit.discarded = discarded;
    return fit;
}

}  // namespace liouville
