#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "elliptic.hpp"
#include "quadrature.hpp"
#include "reduced_field.hpp"

namespace liouville {

// ---------------------------------------------------------------------------------------------
// Bubble extraction

struct BubbleFit {
    BubbleParams params;
    double constant = 0;
    double rms_residual = 0;
    int n_points = 0;
    bool low_confidence = false;
};

namespace detail {

struct BubbleFitFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const std::vector<Point>* pts;
    const std::vector<double>* vals;

    int inputs() const { return 4; }
    int values() const { return static_cast<int>(pts->size()); }

    // x = (log delta, b1, b2, C); model PW_{delta,b} + C.
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const Point b{x(1), x(2)};
        if (!(b.norm2() < 1)) {
            f.setConstant(1e6);
            return 0;
        }
        const double d = std::exp(x(0));
        const BubbleAnsatz a(BubbleParams{0, b, d, d}, {}, 256);
        for (std::size_t k = 0; k < pts->size(); ++k) f(static_cast<Eigen::Index>(k)) = a.PW((*pts)[k]) + x(3) - (*vals)[k];
        return 0;
    }
};

}  // namespace detail

// Least-squares fit of w against PW_{delta,b} + C over the core {e^w >= threshold * max e^w}.
inline BubbleFit fit_bubble(const DiskField& w, double threshold = 0.01, double max_rms = 0.05) {
    const DiskGrid& g = *w.grid;
    const auto it = std::max_element(w.values.begin(), w.values.end());
    const std::size_t kmax = static_cast<std::size_t>(it - w.values.begin());
    const double wmax = *it;
    const Point b0 = g.point(kmax);
    std::vector<Point> pts;
    std::vector<double> vals;
    double half = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.values.size(); ++k) {
        const double v = w.values[k];
        if (v >= wmax + std::log(threshold)) {
            pts.push_back(g.point(k));
            vals.push_back(v);
        }
        if (v <= wmax - std::log(4.0)) half = std::min(half, (g.point(k) - b0).norm());
    }
    if (pts.size() < 8) throw std::runtime_error("fit_bubble: core region has too few nodes");
    const double d0 = std::isfinite(half) ? half : 0.1;
    Eigen::VectorXd x(4);
    x << std::log(d0), b0.x1, b0.x2, 0.0;
    {
        const BubbleAnsatz a(BubbleParams{0, b0, d0, d0}, {}, 256);
        x(3) = wmax - a.PW(b0);
    }
    detail::BubbleFitFunctor fn{&pts, &vals};
    Eigen::NumericalDiff<detail::BubbleFitFunctor, Eigen::Central> nd(fn);
    Eigen::LevenbergMarquardt<decltype(nd)> lm(nd);
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    lm.parameters.maxfev = 4000;
    lm.minimize(x);
    Eigen::VectorXd f(static_cast<Eigen::Index>(pts.size()));
    fn(x, f);
    BubbleFit out;
    const double d = std::exp(x(0));
    out.params = BubbleParams{0, {x(1), x(2)}, d, d};
    out.constant = x(3);
    out.n_points = static_cast<int>(pts.size());
    out.rms_residual = std::sqrt(f.squaredNorm() / static_cast<double>(pts.size()));
    out.low_confidence = !(out.rms_residual <= max_rms);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Local maxima of lambda V e^u

struct MaximaCensus {
    int count = 0;
    std::vector<Point> locations;  // by decreasing density
    std::vector<double> values;
    bool radial = false;           // maxima spread around one ring
    bool antipodal = false;
    double antipodal_error = std::numeric_limits<double>::quiet_NaN();  // |p1 + p2|
    double spacing = 0;            // local grid spacing at the maxima
};

inline MaximaCensus maxima_census(const DiskField& u, double lambda, const PotentialCoeffs& c, double significance = 1e-3) {
    const DiskGrid& g = *u.grid;
    const int nr = g.n_r(), m = g.n_theta();
    std::vector<double> d(u.values.size());
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < m; ++j) d[g.index(i, j)] = lambda * eval_V(c, g.point(i, j)) * std::exp(u(i, j));
    const double dmax = *std::max_element(d.begin(), d.end());
    struct Cand {
        double v;
        int i, j;
    };
    std::vector<Cand> cand;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < m; ++j) {
            const double v = d[g.index(i, j)];
            if (v < significance * dmax) continue;
            bool ge_all = true, gt_one = false;
            for (int di = -1; di <= 1 && ge_all; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    int ii = i + di, jj = j + dj;
                    if (ii >= nr) continue;
                    if (ii < 0) {  // across the pole
                        ii = 0;
                        jj += m / 2;
                    }
                    jj = ((jj % m) + m) % m;
                    const double nv = d[g.index(ii, jj)];
                    if (nv > v) {
                        ge_all = false;
                        break;
                    }
                    if (nv < v) gt_one = true;
                }
            if (ge_all && gt_one) cand.push_back({v, i, j});
        }
    std::sort(cand.begin(), cand.end(), [](const Cand& a, const Cand& b) { return a.v > b.v; });
    MaximaCensus out;
    std::vector<int> rings;
    for (const Cand& cd : cand) {
        const Point p = g.point(cd.i, cd.j);
        const double h = g.spacing(cd.i) * std::sqrt(g.jacobian(cd.i, cd.j));
        bool merged = false;
        for (const Point& q : out.locations)
            if ((p - q).norm() <= 2 * h) merged = true;
        if (merged) continue;
        out.locations.push_back(p);
        out.values.push_back(cd.v);
        rings.push_back(cd.i);
        out.spacing = std::max(out.spacing, h);
    }
    out.count = static_cast<int>(out.locations.size());
    out.radial = out.count >= 3 && std::all_of(rings.begin(), rings.end(), [&](int r) { return std::abs(r - rings[0]) <= 1; });
    if (out.count == 2) {
        out.antipodal_error = (out.locations[0] + out.locations[1]).norm();
        out.antipodal = out.antipodal_error <= 3 * out.spacing;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Zeros of the multiplier map b -> c(b)

struct BranchOptions {
    int n_r = 256, n_theta = 256;
    NewtonOptions newton;
    int max_outer = 20;
    double fd_step = 1e-4;   // in scaled coordinates xi
    double max_step = 0.5;   // trust radius in xi
    double xi_tol = 1e-8;
    double g_tol = 1e-9;
};

struct BranchPoint {
    double lambda = 0, delta0 = 0, scale = 0;  // b = xi * scale, scale = delta0 sqrt(log 1/delta0)
    Eigen::Vector2d xi = Eigen::Vector2d::Zero();
    Point b;
    ProjectedResult proj;
    double g_norm = std::numeric_limits<double>::quiet_NaN();
    int outer_iterations = 0;
    int projected_solves = 0;
    bool converged = false;
    std::string message;
};

// Context for one lambda: the operator is shared across centres, each c(b) uses a grid with its
// pole on b.
class MultiplierMap {
public:
    MultiplierMap(double lambda, PotentialCoeffs c, int n_r, int n_theta, NewtonOptions opt)
        : lambda_(lambda), c_(std::move(c)), n_r_(n_r), n_theta_(n_theta), opt_(std::move(opt)) {
        delta0_ = delta_of(lambda, {0, 0}, c_);
        scale_ = delta0_ * std::sqrt(std::log(1 / delta0_));
        norm_ = 3 * delta0_ * delta0_ * delta0_ * std::log(1 / delta0_);
        A_ = make_laplacian(DiskGrid::clustered(n_r, n_theta, delta0_));
    }

    double lambda() const { return lambda_; }
    double delta0() const { return delta0_; }
    double scale() const { return scale_; }
    double admissible_radius() const { return std::pow(delta0_, 2.0 / 3.0) / scale_; }
    const std::shared_ptr<const PolarLaplacian>& laplacian() const { return A_; }
    GridPtr grid_at(Point b) const { return DiskGrid::clustered(n_r_, n_theta_, delta0_, b); }
    Point b_of(const Eigen::Vector2d& xi) const { return {xi(0) * scale_, xi(1) * scale_}; }

    Background background(Point b) const { return Background::bubble(lambda_, b, c_, A_, grid_at(b)); }

    // Multipliers scaled by 3 delta^3 log(1/delta), so zeros of F sit at O(1) values.
    Eigen::Vector2d operator()(const Eigen::Vector2d& xi, const Vec& warm, ProjectedResult* out = nullptr) const {
        const Background bg = background(b_of(xi));
        const KernelSpace K(bg);
        ProjectedResult r = projected_solve(bg, K, warm, opt_);
        ++solves;
        const Eigen::Vector2d g = r.c / norm_;
        if (!r.converged) throw SolverError("projected solve failed: " + r.message);
        if (out) *out = std::move(r);
        return g;
    }

    mutable int solves = 0;

private:
    double lambda_;
    PotentialCoeffs c_;
    int n_r_, n_theta_;
    NewtonOptions opt_;
    double delta0_, scale_, norm_;
    std::shared_ptr<const PolarLaplacian> A_;
};

// Newton on c(b(xi)) = 0 with a forward-difference Jacobian and a trust radius.
inline BranchPoint find_branch(const MultiplierMap& map, Eigen::Vector2d xi, const BranchOptions& opt, Vec warm) {
    BranchPoint bp;
    bp.lambda = map.lambda();
    bp.delta0 = map.delta0();
    bp.scale = map.scale();
    const double radius = map.admissible_radius();
    if (warm.size() != map.laplacian()->size()) warm = Vec::Zero(map.laplacian()->size());
    try {
        ProjectedResult pr;
        Eigen::Vector2d g = map(xi, warm, &pr);
        for (int it = 0; it < opt.max_outer; ++it) {
            bp.outer_iterations = it + 1;
            if (g.norm() <= opt.g_tol) {
                bp.converged = true;
                break;
            }
            Eigen::Matrix2d J;
            for (int k = 0; k < 2; ++k) {
                Eigen::Vector2d e = xi;
                e(k) += opt.fd_step;
                J.col(k) = (map(e, pr.phi) - g) / opt.fd_step;
            }
            Eigen::Vector2d dx = -J.fullPivLu().solve(g);
            if (!dx.allFinite()) throw SolverError("singular multiplier Jacobian");
            if (dx.norm() > opt.max_step) dx *= opt.max_step / dx.norm();
            // backtrack until |g| decreases
            Eigen::Vector2d xn = xi + dx, gn;
            ProjectedResult pn;
            bool accepted = false;
            for (int k = 0; k < 6; ++k) {
                if (xn.norm() > radius) {
                    dx *= 0.5;
                    xn = xi + dx;
                    continue;
                }
                gn = map(xn, pr.phi, &pn);
                if (gn.norm() < g.norm()) {
                    accepted = true;
                    break;
                }
                dx *= 0.5;
                xn = xi + dx;
            }
            if (!accepted) {
                bp.message = "no descent for |c(b)|: no zero of the multiplier map near the start";
                break;
            }
            xi = xn;
            g = gn;
            pr = std::move(pn);
            if (dx.norm() <= opt.xi_tol) {
                bp.converged = g.norm() <= 1e3 * opt.g_tol;
                if (!bp.converged) bp.message = "stalled away from a zero";
                break;
            }
        }
        if (!bp.converged && bp.message.empty()) bp.message = "outer iteration limit reached";
        bp.xi = xi;
        bp.b = map.b_of(xi);
        bp.g_norm = g.norm();
        bp.proj = std::move(pr);
    } catch (const SolverError& e) {
        bp.converged = false;
        bp.message = e.what();
        bp.xi = xi;
        bp.b = map.b_of(xi);
    }
    bp.projected_solves = map.solves;
    return bp;
}

// ---------------------------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
    PotentialCoeffs coeffs;
    std::optional<Point> xi0;  // reduced-field target; empty when F has no stable zero
    double lambda_max = 1e-2, lambda_min = 1e-6, ratio = 0.5;
    int n_r = 256, n_theta = 256;
    double newton_tol = 1e-11;
    bool compute_min_sv = true;
    bool keep_fields = false;
    unsigned seed = 12345;

    void validate() const {
        if (!(lambda_max > 0) || !(lambda_min > 0) || lambda_min > lambda_max)
            throw std::invalid_argument("SweepConfig: need 0 < lambda_min <= lambda_max");
        if (!(ratio > 0 && ratio < 1)) throw std::invalid_argument("SweepConfig: ratio must lie in (0,1)");
        if (!(newton_tol > 0)) throw std::invalid_argument("SweepConfig: newton_tol must be positive");
    }
};

struct SweepRow {
    double lambda = 0, delta = 0;
    Point b_fit;
    double mass = std::numeric_limits<double>::quiet_NaN();
    double phi_h1 = std::numeric_limits<double>::quiet_NaN();
    double min_sv = std::numeric_limits<double>::quiet_NaN();
    int n_newton = 0;
    bool converged = false;
    bool two_maxima = false;
    // diagnostics
    Eigen::Vector2d xi = Eigen::Vector2d::Zero();
    Point b_branch;
    double delta_fit = std::numeric_limits<double>::quiet_NaN();
    double fit_rms = std::numeric_limits<double>::quiet_NaN();
    double mass_y = std::numeric_limits<double>::quiet_NaN();
    double concentration = std::numeric_limits<double>::quiet_NaN();
    int maxima = 0;
    double antipodal_error = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool quadratic = false;
    double branch_gap = std::numeric_limits<double>::quiet_NaN();  // sup |phi_full - phi_projected|
    std::string message;
    std::optional<DiskField> w;

    bool non_radial() const { return converged && b_fit.norm() > delta; }
};

struct SweepResult {
    std::vector<SweepRow> rows;  // decreasing lambda
    std::optional<Point> xi0;

    std::vector<const SweepRow*> converged() const {
        std::vector<const SweepRow*> out;
        for (const auto& r : rows)
            if (r.converged) out.push_back(&r);
        return out;
    }
    const SweepRow* terminal() const {
        const SweepRow* t = nullptr;
        for (const auto& r : rows)
            if (r.converged) t = &r;
        return t;
    }
};

inline void write_sweep_csv(const SweepResult& s, std::ostream& os) {
    os << "lambda,delta,b1,b2,mass,phi_h1,min_sv,n_newton,converged,two_maxima\n" << std::setprecision(17);
    for (const auto& r : s.rows)
        os << r.lambda << ',' << r.delta << ',' << r.b_fit.x1 << ',' << r.b_fit.x2 << ',' << r.mass << ',' << r.phi_h1 << ','
           << r.min_sv << ',' << r.n_newton << ',' << (r.converged ? 1 : 0) << ',' << (r.two_maxima ? 1 : 0) << '\n';
}

inline void write_sweep_csv(const SweepResult& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_sweep_csv(s, os);
}

// Full solve at a branch point, then the measurements of one sweep row.
inline SweepRow measure_row(const MultiplierMap& map, const BranchPoint& bp, double lambda, const SweepConfig& cfg) {
    SweepRow row;
    row.lambda = lambda;
    row.xi = bp.xi;
    row.b_branch = bp.b;
    row.phi_h1 = bp.proj.phi_h1;
    const Background bg = map.background(bp.b);
    NewtonOptions nopt;
    nopt.tol = cfg.newton_tol;
    // Certify from the bare ansatz rather than the projected solution, so the Newton history is
    // a genuine convergence record; the two must agree.
    const SolveResult sol = newton_solve(bg, Vec::Zero(bg.A->size()), nopt);
    row.n_newton = sol.iterations;
    if (sol.converged) row.branch_gap = (sol.phi - bp.proj.phi).cwiseAbs().maxCoeff();
    row.residual = sol.residual;
    row.quadratic = sol.certificate.ok;
    row.converged = sol.converged;
    if (!sol.converged) {
        row.message = "full Newton: " + sol.message;
        return row;
    }
    const BubbleFit fit = fit_bubble(sol.w);
    row.b_fit = fit.params.b;
    row.delta_fit = fit.params.delta;
    row.fit_rms = fit.rms_residual;
    row.delta = delta_of(lambda, row.b_fit, cfg.coeffs);
    const MassReport mass = mass_identity(sol.w, lambda, cfg.coeffs);
    row.mass = mass.x_side;
    row.mass_y = mass.y_side;
    row.concentration = mass.concentration;
    const MaximaCensus census = maxima_census(pull_back(sol.w), lambda, cfg.coeffs);
    row.maxima = census.count;
    row.antipodal_error = census.antipodal_error;
    row.two_maxima = census.count == 2 && census.antipodal;
    if (cfg.compute_min_sv) row.min_sv = linearized_min_sv_h1(bg, Vec::Zero(bg.A->size()), true, cfg.seed);
    if (cfg.keep_fields) row.w = sol.w;
    return row;
}

// Continuation in lambda with ratio cfg.ratio. Each row locates the zero of c(b) starting from
// the previous row's scaled centre (or xi0), then certifies it with an unconstrained Newton solve.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult out;
    out.xi0 = cfg.xi0;
    const Eigen::Vector2d target = cfg.xi0 ? Eigen::Vector2d(cfg.xi0->x1, cfg.xi0->x2) : Eigen::Vector2d::Zero();
    Eigen::Vector2d xi = target;
    Vec warm;
    double prev_delta = 0;
    bool have_branch = false;
    BranchOptions bopt;
    bopt.n_r = cfg.n_r;
    bopt.n_theta = cfg.n_theta;
    bopt.newton.tol = cfg.newton_tol;
    for (double lambda = cfg.lambda_max; lambda >= cfg.lambda_min * (1 - 1e-12); lambda *= cfg.ratio) {
        const MultiplierMap map(lambda, cfg.coeffs, cfg.n_r, cfg.n_theta, bopt.newton);
        if (have_branch && warm.size() > 0) warm *= std::pow(map.delta0() / prev_delta, 2);
        const BranchPoint bp = find_branch(map, have_branch ? xi : target, bopt, have_branch ? warm : Vec());
        SweepRow row;
        if (bp.converged) {
            row = measure_row(map, bp, lambda, cfg);
        } else {
            row.lambda = lambda;
            row.delta = map.delta0();
            row.xi = bp.xi;
            row.message = "branch: " + bp.message;
        }
        if (row.converged) {
            have_branch = true;
            xi = bp.xi;
            warm = bp.proj.phi;
            prev_delta = map.delta0();
        } else if (have_branch) {
            out.rows.push_back(std::move(row));
            break;  // branch lost: the previous row is the resolvability floor
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Reports

struct ScalingReport {
    bool has_target = false;
    std::vector<double> lambdas;
    std::vector<Point> btilde;
    std::vector<double> error;  // |b~ - xi0| / |xi0|, or |b~| without a target
    bool error_decreasing = false;
    double terminal_error = std::numeric_limits<double>::quiet_NaN();
    Point terminal_btilde;
    std::vector<double> delta_over_b;
    bool delta_over_b_decreasing = false;
    int first_decreasing_row = -1;  // index from which delta/|b| decreases to the end
    std::string note;
};

inline ScalingReport scaling_check(const SweepResult& s, std::optional<Point> xi0) {
    const auto rows = s.converged();
    if (rows.size() < 4) throw std::runtime_error("scaling_check: needs at least 4 converged rows");
    ScalingReport rep;
    rep.has_target = xi0.has_value() && xi0->norm() > 0;
    if (!rep.has_target) rep.note = "no non-simple target";
    for (const SweepRow* r : rows) {
        const double sc = r->delta * std::sqrt(std::log(1 / r->delta));
        const Point bt{r->b_fit.x1 / sc, r->b_fit.x2 / sc};
        rep.lambdas.push_back(r->lambda);
        rep.btilde.push_back(bt);
        rep.error.push_back(rep.has_target ? (bt - *xi0).norm() / xi0->norm() : bt.norm());
        rep.delta_over_b.push_back(r->delta / r->b_fit.norm());
    }
    const std::size_t n = rows.size();
    rep.error_decreasing = true;
    rep.delta_over_b_decreasing = true;
    for (std::size_t k = 1; k < n; ++k) {
        if (!(rep.error[k] < rep.error[k - 1])) rep.error_decreasing = false;
        if (!(rep.delta_over_b[k] < rep.delta_over_b[k - 1])) rep.delta_over_b_decreasing = false;
    }
    rep.first_decreasing_row = static_cast<int>(n) - 1;
    while (rep.first_decreasing_row > 0 && rep.delta_over_b[rep.first_decreasing_row] < rep.delta_over_b[rep.first_decreasing_row - 1])
        --rep.first_decreasing_row;
    rep.terminal_error = rep.error.back();
    rep.terminal_btilde = rep.btilde.back();
    return rep;
}

struct MassCheck {
    std::vector<double> rel_error;      // |mass - 16 pi| / 16 pi
    std::vector<double> concentration;  // fraction in |x| <= 0.1
    double terminal_rel_error = std::numeric_limits<double>::quiet_NaN();
    double terminal_concentration = std::numeric_limits<double>::quiet_NaN();
    bool within_5_percent = false;
};

inline MassCheck mass_check(const SweepResult& s) {
    MassCheck m;
    const double q = 16 * std::numbers::pi;
    for (const SweepRow* r : s.converged()) {
        m.rel_error.push_back(std::fabs(r->mass - q) / q);
        m.concentration.push_back(r->concentration);
    }
    if (!m.rel_error.empty()) {
        m.terminal_rel_error = m.rel_error.back();
        m.terminal_concentration = m.concentration.back();
        m.within_5_percent = m.terminal_rel_error <= 0.05;
    }
    return m;
}

// ||phi||_{H^1} of the projected correction at b = 0 over a delta list (decreasing), with its
// power-law fit.
struct PhiRate {
    std::vector<double> deltas, norms;
    RateFit fit;
};

inline PhiRate phi_rate(const PotentialCoeffs& c, const std::vector<double>& deltas, int n_r = 256, int n_theta = 256) {
    PhiRate out;
    std::vector<std::pair<double, double>> samples;
    for (double d : deltas) {
        const double lambda = BubbleParams::from_delta(d, {0, 0}, c).lambda;
        // Drive each solve to its rounding floor: at small delta the correction sits far below
        // the default tolerance relative to the bubble density.
        NewtonOptions opt;
        opt.tol = 1e-16;
        const MultiplierMap map(lambda, c, n_r, n_theta, opt);
        ProjectedResult pr;
        map(Eigen::Vector2d::Zero(), Vec::Zero(map.laplacian()->size()), &pr);
        out.deltas.push_back(d);
        out.norms.push_back(pr.phi_h1);
        samples.emplace_back(d, pr.phi_h1);
    }
    out.fit = rate_fit(samples, RateModel::power);
    return out;
}

// min_sv (H^1, restricted to the complement of the translation kernels) at the base state PW, b = 0.
inline std::vector<double> min_sv_sweep(const PotentialCoeffs& c, const std::vector<double>& deltas, int n_r = 256, int n_theta = 256) {
    std::vector<double> out;
    for (double d : deltas) {
        const double lambda = BubbleParams::from_delta(d, {0, 0}, c).lambda;
        auto A = make_laplacian(DiskGrid::clustered(n_r, n_theta, d));
        const Background bg = Background::bubble(lambda, {0, 0}, c, A);
        out.push_back(linearized_min_sv_h1(bg, Vec::Zero(A->size()), true));
    }
    return out;
}

inline SweepResult read_sweep_csv(std::istream& in) {
    SweepResult s;
    std::string line;
    if (!std::getline(in, line) || line != "lambda,delta,b1,b2,mass,phi_h1,min_sv,n_newton,converged,two_maxima")
        throw std::runtime_error("sweep CSV: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                v.push_back(std::numeric_limits<double>::quiet_NaN());  // "nan" does not parse everywhere
            }
        }
        if (v.size() != 10) throw std::runtime_error("sweep CSV: expected 10 columns in '" + line + "'");
        SweepRow r;
        r.lambda = v[0];
        r.delta = v[1];
        r.b_fit = {v[2], v[3]};
        r.mass = v[4];
        r.phi_h1 = v[5];
        r.min_sv = v[6];
        r.n_newton = static_cast<int>(v[7]);
        r.converged = v[8] != 0;
        r.two_maxima = v[9] != 0;
        s.rows.push_back(r);
    }
    return s;
}

// Trend checks on a finished sweep.
struct SweepSummary {
    std::optional<Point> xi0;
    int converged_rows = 0;
    double terminal_lambda = std::numeric_limits<double>::quiet_NaN();
    bool terminal_two_maxima = false;
    MassCheck mass;
    std::optional<ScalingReport> scaling;  // needs >= 4 converged rows
    std::optional<RateFit> phi_fit;        // phi_h1 against delta over converged rows
    double min_sv_log_spread = std::numeric_limits<double>::quiet_NaN();  // (max - min)/max of min_sv log(1/delta)

    bool btilde_within(double tol) const { return scaling && scaling->has_target && scaling->terminal_error <= tol; }
};

inline SweepSummary summarize(const SweepResult& s, std::optional<Point> xi0) {
    SweepSummary out;
    out.xi0 = xi0;
    const auto rows = s.converged();
    out.converged_rows = static_cast<int>(rows.size());
    if (const SweepRow* t = s.terminal()) {
        out.terminal_lambda = t->lambda;
        out.terminal_two_maxima = t->two_maxima;
    }
    out.mass = mass_check(s);
    if (rows.size() >= 4) {
        out.scaling = scaling_check(s, xi0);
        std::vector<std::pair<double, double>> pts;
        for (const SweepRow* r : rows) pts.emplace_back(r->delta, r->phi_h1);
        std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first > b.first; });
        try {
            out.phi_fit = rate_fit(pts);
        } catch (const std::invalid_argument&) {
        }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const SweepRow* r : rows)
        if (std::isfinite(r->min_sv)) {
            const double v = r->min_sv * std::log(1 / r->delta);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi > 0) out.min_sv_log_spread = (hi - lo) / hi;
    return out;
}

// Stable zero of F used as the sweep target: the one with the largest first coordinate.
inline std::optional<Point> reduced_target(const PotentialCoeffs& c) {
    const ZeroSearch zs = find_zeros(c, Box{}, 20, 1e-12);
    std::optional<Point> best;
    for (const auto& z : zs.zeros)
        if (z.stable && (!best || z.xi.x1 > best->x1 || (z.xi.x1 == best->x1 && z.xi.x2 > best->x2))) best = z.xi;
    return best;
}

}  // namespace liouville
