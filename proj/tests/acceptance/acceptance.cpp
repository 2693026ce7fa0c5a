// Acceptance run: one PASS/FAIL line per criterion, details indented below it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "liouville/elliptic.hpp"
#include "liouville/harness.hpp"
#include "liouville/integral_suite.hpp"
#include "liouville/quadrature.hpp"
#include "liouville/reduced_field.hpp"

using namespace liouville;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { details.push_back("     " + what); }
};

std::string num(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string pt(Point p) { return "(" + num(p.x1) + ", " + num(p.x2) + ")"; }

int failures = 0;

void run(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.details.push_back(std::string("FAIL exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %d: %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), secs);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
}

// Criterion 1 ---------------------------------------------------------------------------------
Outcome reduced_field_exactness() {
    Outcome o;
    const PotentialCoeffs c = PotentialCoeffs::example();
    for (Point z : {Point{1, -1}, Point{-1, 1}}) {
        const Point F = eval_F(z, c);
        o.check(F.norm() <= 1e-12, "F" + pt(z) + " = " + pt(F) + ", tol 1e-12");
        const int deg = brouwer_degree(c, z, 0.1);
        o.check(deg == -1, "degree on radius-0.1 circle around " + pt(z) + " = " + std::to_string(deg));
    }
    const Classification cl = classify(c, {1, -1});
    const double e0 = std::min(cl.eigs[0], cl.eigs[1]), e1 = std::max(cl.eigs[0], cl.eigs[1]);
    o.check(std::fabs(e0 + 2) <= 1e-10 && std::fabs(e1 - 2) <= 1e-10, "Hessian eigenvalues at (1,-1) = {" + num(e0, 12) + ", " + num(e1, 12) + "}, tol 1e-10");
    return o;
}

// Criteria 2 and 3 share one run of the identity suite.
std::vector<IdentityCheck> suite_rows;

Outcome oracle_suite() {
    Outcome o;
    suite_rows = integral_suite(1e-8);
    int n = 0;
    for (const auto& r : suite_rows) {
        const bool exact = r.id.rfind("moment_z", 0) == 0 || r.id.rfind("odd_", 0) == 0 || r.id.rfind("global_", 0) == 0 ||
                           r.id.rfind("fold_", 0) == 0 || r.id == "bubble_mass";
        if (!exact) continue;
        ++n;
        if (!r.pass) o.check(false, r.id + ": computed " + num(r.computed, 16) + " reference " + num(r.reference, 16));
    }
    o.check(n == 22, std::to_string(n) + " exact identities evaluated (closed-form moments at r in {0.5,1,2,10}, odd moments, "
                         "global pi/4 and 2pi/3, three fold identities at 1e-9, 8 pi mass at 1e-10)");
    return o;
}

Outcome moment_rates() {
    Outcome o;
    if (suite_rows.empty()) suite_rows = integral_suite(1e-8);
    for (const auto& r : suite_rows) {
        if (r.id == "moment_gamma2_terminal")
            o.check(r.pass, "int e^W|x|^2/(delta^2 log 1/delta) at delta=1e-4 = " + num(r.computed, 6) + " vs 16 pi, rel err " +
                                num(std::fabs(r.computed / r.reference - 1), 3) + " (tol 0.10)");
        if (r.id == "kernel_pairing")
            o.check(r.pass, "int e^W PZ^1 (x1-b1)/delta = " + num(r.computed, 8) + " vs 2 pi (tol 5%)");
        if (r.id.rfind("gram_", 0) == 0) o.check(r.pass, r.id + " / (2pi/3) = " + num(r.computed, 8));
    }
    return o;
}

// Criterion 4 ---------------------------------------------------------------------------------
Outcome reduced_projection_consistency() {
    Outcome o;
    const PotentialCoeffs c = PotentialCoeffs::example();
    const double d = 1e-4, L = std::log(1 / d);
    const double scale = std::max(std::fabs(eval_F({0, 0}, c).x1), std::fabs(eval_F({0, 0}, c).x2));
    for (Point xi : {Point{1, -1}, Point{2, 0}}) {
        const Point b{xi.x1 * d * std::sqrt(L), xi.x2 * d * std::sqrt(L)};
        const auto p = BubbleParams::from_delta(d, b, c);
        const Point F = eval_F(xi, c);
        const double norm = 2 * kPi * d * d * d * L;
        const Point r{reduced_projection(p, c, 1) / norm, reduced_projection(p, c, 2) / norm};
        for (int i = 0; i < 2; ++i) {
            const double got = i ? r.x2 : r.x1, want = i ? F.x2 : F.x1;
            const double tol = 0.25 * std::max(std::fabs(want), scale);
            o.check(std::fabs(got - want) <= tol, "xi=" + pt(xi) + " component " + std::to_string(i + 1) + ": projection/(2 pi delta^3 log) = " +
                                                      num(got) + ", F = " + num(want) + ", tol " + num(tol));
        }
    }
    return o;
}

// Criterion 5 ---------------------------------------------------------------------------------
Outcome solver_fixture() {
    Outcome o;
    const double lambda = 1e-2;
    SolveConfig cfg;
    cfg.lambda = lambda;
    cfg.b = Point{0, 0};
    cfg.n_r = 512;
    cfg.n_theta = 512;
    const SolveResult r = newton_solve(cfg, PotentialCoeffs::constant());
    // small root of lambda/4 = 8 d^2/(1+d^2)^2
    const double k = lambda / 32, a = 1 / k - 2, dh = std::sqrt((a - std::sqrt(a * a - 4)) / 2);
    const BubbleParams ex{lambda, {0, 0}, dh, dh};
    double err = 0;
    for (std::size_t i = 0; i < r.w.values.size(); ++i)
        err = std::max(err, std::fabs(r.w.values[i] - (bubble_W(ex, r.w.grid->point(i)) + std::log(4 / lambda))));
    o.check(r.converged, "Newton converged, residual " + num(r.residual));
    o.check(err <= 1e-6, "sup error against the closed-form radial solution on 512x512 = " + num(err) + " (tol 1e-6)");
    o.check(r.iterations <= 8, std::to_string(r.iterations) + " Newton iterations (<= 8)");
    o.check(r.certificate.ok, "quadratic certificate, max r_{k+1}/r_k^2 = " + num(r.certificate.max_ratio));
    return o;
}

// Criterion 6 ---------------------------------------------------------------------------------
SweepConfig sweep_config(const PotentialCoeffs& c) {
    SweepConfig cfg;
    cfg.coeffs = c;
    cfg.xi0 = reduced_target(c);
    cfg.lambda_max = 1e-2;
    cfg.lambda_min = 1e-6;
    cfg.ratio = 0.5;
    cfg.n_r = 256;
    cfg.n_theta = 256;
    return cfg;
}

Outcome nonsimple_construction() {
    Outcome o;
    const SweepConfig cfg = sweep_config(PotentialCoeffs::example());
    if (!cfg.xi0) {
        o.check(false, "no stable zero of F");
        return o;
    }
    const SweepResult s = run_sweep(cfg);
    for (const auto& r : s.rows) {
        const double sc = r.delta * std::sqrt(std::log(1 / r.delta));
        o.note("lambda " + num(r.lambda) + (r.converged ? "  delta " + num(r.delta) + "  b_fit " + pt(r.b_fit) + "  b~ " +
                                                                pt({r.b_fit.x1 / sc, r.b_fit.x2 / sc}) + "  mass " + num(r.mass, 6) +
                                                                "  maxima " + std::to_string(r.maxima) + "  delta/|b| " +
                                                                num(r.delta / r.b_fit.norm())
                                                          : "  not converged: " + r.message));
    }
    const auto rows = s.converged();
    int nonradial = 0;
    for (const SweepRow* r : rows) nonradial += r->non_radial();
    o.check(nonradial >= 4, std::to_string(nonradial) + " converged non-radial rows");
    const SweepRow* t = s.terminal();
    if (!t || rows.size() < 4) {
        o.check(false, "too few converged rows for the trend checks");
        return o;
    }
    o.note("terminal resolvable lambda " + num(t->lambda));
    o.check(t->two_maxima, "(a) maxima census at terminal lambda: " + std::to_string(t->maxima) + " maxima, |p1+p2| = " + num(t->antipodal_error));
    const MassCheck m = mass_check(s);
    o.check(m.within_5_percent, "(b) mass = " + num(t->mass, 8) + ", rel err to 16 pi " + num(m.terminal_rel_error));
    const ScalingReport sr = scaling_check(s, cfg.xi0);
    o.check(sr.terminal_error <= 0.2, "(c) b~ = " + pt(sr.terminal_btilde) + ", rel err to " + pt(*cfg.xi0) + " = " + num(sr.terminal_error) +
                                          " (tol 0.2)");
    std::string ratios;
    for (double v : sr.delta_over_b) ratios += num(v) + " ";
    o.check(sr.delta_over_b_decreasing, "(d) delta/|b_fit| strictly decreasing: " + ratios);
    if (!sr.delta_over_b_decreasing)
        o.note("delta/|b_fit| decreases from converged row " + std::to_string(sr.first_decreasing_row) + " to the end");
    return o;
}

// Criterion 7 ---------------------------------------------------------------------------------
Outcome correction_and_spectrum() {
    Outcome o;
    const PotentialCoeffs c = PotentialCoeffs::example();
    const std::vector<double> ds = {1e-4, 1e-5, 1e-6, 1e-7};
    const PhiRate pr = phi_rate(c, ds);
    std::string vals;
    for (std::size_t k = 0; k < ds.size(); ++k) vals += num(ds[k], 1) + ":" + num(pr.norms[k]) + " ";
    o.check(pr.fit.exponent >= 1.8, "||phi||_H1 exponent over delta in [1e-7, 1e-4] = " + num(pr.fit.exponent) + " (>= 1.8); " + vals);
    const PhiRate wide = phi_rate(c, {1e-2, 1e-3, 1e-4, 1e-5});
    o.note("for reference, exponent over [1e-5, 1e-2] = " + num(wide.fit.exponent) + " (phi ~ delta^2 log^2(1/delta))");
    const std::vector<double> sv = min_sv_sweep(c, {1e-2, 1e-3, 1e-4});
    double lo = 1e300, hi = 0;
    std::string s;
    for (std::size_t k = 0; k < sv.size(); ++k) {
        const double v = sv[k] * std::log(1 / std::pow(10.0, -2.0 - static_cast<double>(k)));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        s += num(v) + " ";
    }
    o.check((hi - lo) / lo < 0.5, "min_sv log(1/delta) at delta = 1e-2,1e-3,1e-4: " + s + "spread " + num((hi - lo) / lo) + " (< 0.5)");
    return o;
}

// Criterion 8 ---------------------------------------------------------------------------------
Outcome negative_control() {
    Outcome o;
    PotentialCoeffs c = PotentialCoeffs::example();
    c.A0 = 3;
    const double d = 1e-4, L = std::sqrt(std::log(1 / d));
    const double target = 2 * kPi * (2 * c.A0 - 4);
    for (double s : {0.5, 1.0, 2.0}) {
        const Point b{s * d * L, 0};
        const double coef = reduced_projection(BubbleParams::from_delta(d, b, c), c, 1) / (d * b.x1);
        o.check(std::fabs(coef / target - 1) <= 0.15, "b1 = " + num(s) + " delta sqrt(log): projection/(delta b1) = " + num(coef) +
                                                           " vs 2 pi (2 A0 - 4) = " + num(target) + " (tol 15%)");
    }
    const SweepConfig cfg = sweep_config(c);
    const SweepResult sw = run_sweep(cfg);
    const auto rows = sw.converged();
    if (rows.size() < 4) {
        o.check(false, "sweep produced " + std::to_string(rows.size()) + " converged rows");
        return o;
    }
    const ScalingReport sr = scaling_check(sw, std::nullopt);
    std::string trace;
    for (std::size_t k = 0; k < sr.btilde.size(); ++k) trace += num(sr.btilde[k].norm(), 3) + " ";
    bool decreasing = true;
    for (std::size_t k = 1; k < sr.btilde.size(); ++k) decreasing = decreasing && sr.btilde[k].norm() < sr.btilde[k - 1].norm();
    o.check(decreasing && sr.btilde.back().norm() < 0.1,
            "|b~| along the sweep (start at xi0 = " + pt(*cfg.xi0) + "): " + trace + "; decreasing and terminal < 0.1");
    return o;
}

}  // namespace

int main() {
    run(1, "reduced-field exactness", reduced_field_exactness);
    run(2, "closed-form integral identities", oracle_suite);
    run(3, "moment rates and Gram matrix", moment_rates);
    run(4, "reduced projection against F", reduced_projection_consistency);
    run(5, "radial solver fixture", solver_fixture);
    run(6, "non-simple construction sweep", nonsimple_construction);
    run(7, "correction and spectrum rates", correction_and_spectrum);
    run(8, "negative control A0 = 3", negative_control);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
