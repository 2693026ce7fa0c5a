#pragma once

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace liouville {

struct IdentityCheck {
    std::string id;
    std::string identity;
    double computed = 0;
    double reference = 0;  // closed-form value, or the target of a fitted quantity
    double tolerance = 0;
    bool relative = true;
    bool pass = false;
};

namespace detail {

inline IdentityCheck make_check(std::string id, std::string what, double computed, double reference, double tol, bool relative = true) {
    IdentityCheck c{std::move(id), std::move(what), computed, reference, tol, relative, false};
    const double err = relative ? std::fabs(computed / reference - 1) : std::fabs(computed - reference);
    c.pass = err <= tol;
    return c;
}

inline double plane_integral(const std::function<double(Point)>& f, double R, std::function<double()> tail) {
    auto spec = QuadratureSpec::plane(R, std::move(tail));
    spec.focus_scale = 1.0;
    spec.tol = 1e-13;
    return integrate(spec, f).value;
}

}  // namespace detail

// Closed-form identities of the bubble integrals plus the small-delta rate checks. `tol` is
// the relative tolerance for the exact identities; rate checks carry their own tolerances.
inline std::vector<IdentityCheck> integral_suite(double tol = 1e-8) {
    using detail::make_check;
    constexpr double pi = std::numbers::pi;
    std::vector<IdentityCheck> out;

    for (double r : {0.5, 1.0, 2.0, 10.0}) {
        auto spec = QuadratureSpec::disk(r);
        spec.tol = 1e-13;
        spec.focus_scale = std::min(1.0, r / 4);
        const std::string rs = std::to_string(r).substr(0, std::to_string(r).find('.') + 2);
        const auto zi4 = integrate(spec, [](Point z) { return std::pow(z.x1, 4) / std::pow(1 + z.norm2(), 3); });
        const auto zz = integrate(spec, [](Point z) { return z.x1 * z.x1 * z.x2 * z.x2 / std::pow(1 + z.norm2(), 3); });
        out.push_back(make_check("moment_zi4_r" + rs, "int_{|z|<r} z_i^4/(1+|z|^2)^3", zi4.value,
                                 kernel_moment_closed_form(MomentKind::zi4, r), tol));
        out.push_back(make_check("moment_zi2zj2_r" + rs, "int_{|z|<r} z_i^2 z_j^2/(1+|z|^2)^3", zz.value,
                                 kernel_moment_closed_form(MomentKind::zi2zj2, r), tol));
        const auto o1 = integrate(spec, [](Point z) { return std::pow(z.x1, 3) * z.x2 / std::pow(1 + z.norm2(), 3); });
        const auto o2 = integrate(spec, [](Point z) { return z.x1 * std::pow(z.x2, 3) / std::pow(1 + z.norm2(), 3); });
        out.push_back(make_check("odd_zi3zj_r" + rs, "int z_i^3 z_j/(1+|z|^2)^3 / int |.|", o1.value / o1.abs_scale, 0.0, tol, false));
        out.push_back(make_check("odd_zizj3_r" + rs, "int z_i z_j^3/(1+|z|^2)^3 / int |.|", o2.value / o2.abs_scale, 0.0, tol, false));
    }

    const double R = 1e3;
    const double p3 = detail::plane_integral([](Point z) { return z.x1 * z.x1 / std::pow(1 + z.norm2(), 3); }, R, [R] {
        const double u = 1 + R * R;
        return pi / 2 * (1 / u - 0.5 / (u * u));
    });
    out.push_back(make_check("global_zi2_p3", "int_R2 z_i^2/(1+|z|^2)^3 = pi/4", p3, pi / 4, tol));
    const double p4 = detail::plane_integral([](Point z) { return z.x1 * z.x1 / std::pow(1 + z.norm2(), 4); }, R, [R] {
        const double u = 1 + R * R;
        return pi / 2 * (0.5 / (u * u) - 1.0 / (3 * u * u * u));
    });
    out.push_back(make_check("global_zi2_p4", "8 int_R2 z_i^2/(1+|z|^2)^4 = 2pi/3", 8 * p4, 2 * pi / 3, tol));
    const double mass = detail::plane_integral([](Point z) { return 8 / std::pow(1 + z.norm2(), 2); }, R,
                                               [R] { return 8 * pi / (1 + R * R); });
    out.push_back(make_check("bubble_mass", "int_R2 e^W = 8 pi", mass, 8 * pi, std::min(tol, 1e-10)));

    const auto pb = BubbleParams::from_delta(0.1, {0.2, 0}, {});
    const std::vector<std::pair<std::string, std::function<double(Point)>>> fold = {
        {"fold_bubble", [&](Point y) { return bubble_expW(pb, y); }},
        {"fold_quadratic", [](Point y) { return y.x1 * y.x1 - 0.5 * y.x1 * y.x2 + 1; }},
        {"fold_exponential", [](Point y) { return std::exp(y.x1 - 2 * y.x2 * y.x2); }},
    };
    for (const auto& [id, f] : fold) {
        const auto [l, r] = fold_integral_check(f, 2);
        out.push_back(make_check(id, "int |x|^2 f(x^2) dx = (1/2) int f(y) dy", l, r, 1e-9));
    }

    // Small-delta rates.
    std::vector<std::pair<double, double>> m2;
    for (double d : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) m2.push_back({d, bubble_moment(BubbleParams::from_delta(d, {0, 0}, {}), 2)});
    out.push_back(make_check("moment_gamma2_terminal", "int e^W |x-b|^2 / (delta^2 log 1/delta) -> 16 pi at delta=1e-4",
                             m2.back().second / (1e-8 * std::log(1e4)), 16 * pi, 0.10));
    const RateFit fit = rate_fit(m2, RateModel::power_log);
    out.push_back(make_check("moment_gamma2_exponent", "fitted exponent of int e^W |x-b|^2", fit.exponent, 2.0, 0.02, false));

    const auto p = BubbleParams::from_delta(1e-4, {0, 0}, {});
    const BubbleAnsatz a(p, {});
    auto spec = QuadratureSpec::focused(p.b, p.delta);
    spec.tol = 1e-10;
    const double pairing = integrate(spec, [&](Point x) { return a.expW(x) * a.PZ(1, x) * (x.x1 - p.b.x1); }).value;
    out.push_back(make_check("kernel_pairing", "int e^W PZ^1 (x1-b1) / delta -> 2 pi", pairing / p.delta, 2 * pi, 0.05));
    for (int h = 1; h <= 2; ++h)
        for (int i = 1; i <= 2; ++i) {
            const double g = integrate(spec, [&](Point x) { return a.Z(h, x) * a.expW(x) * a.PZ(i, x); }).value / (2 * pi / 3);
            const std::string id = "gram_" + std::to_string(h) + std::to_string(i);
            if (h == i) out.push_back(make_check(id, "int Z^h e^W PZ^i / (2pi/3) -> 1", g, 1.0, 0.05));
            else out.push_back(make_check(id, "int Z^h e^W PZ^i / (2pi/3) -> 0", g, 0.0, 0.05, false));
        }
    return out;
}

inline void write_suite_csv(const std::vector<IdentityCheck>& rows, std::ostream& os) {
    os << "id,identity,computed,reference,tolerance,pass\n" << std::setprecision(17);
    for (const auto& r : rows)
        os << r.id << ",\"" << r.identity << "\"," << r.computed << ',' << r.reference << ',' << r.tolerance << ','
           << (r.pass ? "pass" : "fail") << '\n';
}

}  // namespace liouville
