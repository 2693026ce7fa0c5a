#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ansatz.hpp"
#include "disk_grid.hpp"
#include "krylov.hpp"
#include "parallel.hpp"
#include "poisson.hpp"
#include "potential.hpp"
#include "resample.hpp"

namespace liouville {

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double min_sv = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), min_sv(min_sv) {}
    double min_sv;
};

struct SolveConfig {
    double lambda = 0;
    std::optional<Point> b;  // bubble centre of the initial guess; empty means no ansatz
    double newton_tol = 1e-11;
    int max_iter = 30;
    bool deflate_radial = false;
    int n_r = 256, n_theta = 256;
    double gmres_tol = 1e-12;
    int gmres_restart = 60;
    int gmres_max_iter = 2000;

    void validate() const {
        if (!(lambda > 0)) throw std::invalid_argument("SolveConfig: lambda must be positive");
        if (!(newton_tol > 0) || !(gmres_tol > 0)) throw std::invalid_argument("SolveConfig: tolerances must be positive");
        if (max_iter < 1) throw std::invalid_argument("SolveConfig: max_iter must be >= 1");
        if (n_r < 8 || n_theta < 8 || n_theta % 2) throw std::invalid_argument("SolveConfig: bad grid sizes");
        if (b && !(b->norm2() < 1)) throw std::invalid_argument("SolveConfig: |b| must be < 1");
    }
};

// The splitting w = base + phi of the unknown. With a bubble ansatz base = PW and the
// nonlinearity is e^W expm1(E + phi); without one base = 0 and it is (lambda/4) V_half e^phi.
// Either way the discrete problem is A phi = area * N(phi).
struct Background {
    GridPtr grid;
    std::shared_ptr<const PolarLaplacian> A;
    double lambda = 0;
    PotentialCoeffs coeffs;
    std::optional<BubbleAnsatz> ansatz;
    Vec base, s, E;
    bool subtract = false;

    // grid: the node layout of A, possibly recentred; defaults to A's own grid.
    static Background plain(double lambda, PotentialCoeffs c, std::shared_ptr<const PolarLaplacian> A, GridPtr grid = nullptr) {
        Background bg;
        bg.grid = checked_grid(*A, std::move(grid));
        bg.A = std::move(A);
        bg.lambda = lambda;
        bg.coeffs = std::move(c);
        const auto n = bg.A->size();
        bg.base = Vec::Zero(n);
        bg.E = Vec::Zero(n);
        bg.s.resize(n);
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
            bg.s[k] = 0.25 * lambda * eval_V_half(bg.coeffs, bg.grid->point(k)) * bg.jac(k);
        });
        return bg;
    }

    static Background bubble(BubbleAnsatz a, std::shared_ptr<const PolarLaplacian> A, GridPtr grid = nullptr) {
        Background bg;
        bg.grid = checked_grid(*A, std::move(grid));
        bg.A = std::move(A);
        bg.lambda = a.params().lambda;
        bg.coeffs = a.coeffs();
        bg.subtract = true;
        const auto n = bg.A->size();
        bg.base.resize(n);
        bg.s.resize(n);
        bg.E.resize(n);
        bg.ansatz.emplace(std::move(a));
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
            const Point x = bg.grid->point(k);
            bg.base[k] = bg.ansatz->PW(x);
            bg.s[k] = bg.ansatz->expW(x) * bg.jac(k);
            bg.E[k] = bg.ansatz->exponent(x);
        });
        return bg;
    }

    static Background bubble(double lambda, Point b, PotentialCoeffs c, std::shared_ptr<const PolarLaplacian> A,
                             GridPtr grid = nullptr, int n_boundary = 512) {
        return bubble(BubbleAnsatz(BubbleParams::from_lambda(lambda, b, c), c, n_boundary), std::move(A), std::move(grid));
    }

    static GridPtr checked_grid(const PolarLaplacian& A, GridPtr grid) {
        if (!grid) return A.grid();
        if (!grid->same_layout(*A.grid())) throw std::invalid_argument("Background: grid layout differs from the operator's");
        return grid;
    }

    double jac(std::size_t k) const {
        const int m = grid->n_theta();
        return grid->jacobian(static_cast<int>(k / m), static_cast<int>(k % m));
    }

    const Vec& area() const { return A->area(); }

    // Physical cell measure area * |dx/dz|^2.
    Vec measure() const {
        Vec m(A->size());
        for (Eigen::Index k = 0; k < m.size(); ++k) m[k] = area()[k] * jac(static_cast<std::size_t>(k));
        return m;
    }

    Vec nonlinearity(const Vec& phi) const {
        Vec out(phi.size());
        for (Eigen::Index k = 0; k < phi.size(); ++k)
            out[k] = subtract ? s[k] * std::expm1(E[k] + phi[k]) : s[k] * std::exp(E[k] + phi[k]);
        return out;
    }

    // (lambda/4) V_half e^w |dx/dz|^2 at the nodes: the right-hand side in z-coordinates.
    Vec density(const Vec& phi) const { return (s.array() * (E + phi).array().exp()).matrix(); }

    // Diagonal of the linearization weighted by cell area.
    Vec weight(const Vec& phi) const { return area().cwiseProduct(density(phi)); }

    Vec residual(const Vec& phi) const { return A->apply(phi) - area().cwiseProduct(nonlinearity(phi)); }

    // Strong-form sup residual relative to max(1, sup (lambda/4) V e^w), in the grid's z-coordinates.
    double residual_norm(const Vec& res, const Vec& phi) const {
        const double scale = std::max(1.0, density(phi).cwiseAbs().maxCoeff());
        return res.cwiseQuotient(area()).cwiseAbs().maxCoeff() / scale;
    }

    // Rounding level of residual_norm at phi. Near the pole the angular stiffness k^2 / r^2 of
    // the first ring amplifies eps |phi| well above 1e-11 on fine grids.
    double residual_floor(const Vec& phi) const {
        const double scale = std::max(1.0, density(phi).cwiseAbs().maxCoeff());
        const Vec b = A->abs_bound(phi) + area().cwiseProduct(density(phi));
        return 8 * std::numeric_limits<double>::epsilon() * b.cwiseQuotient(area()).maxCoeff() / scale;
    }

    Vec w(const Vec& phi) const { return base + phi; }
    Vec phi_of(const Vec& w) const { return w - base; }
};

inline std::shared_ptr<const PolarLaplacian> make_laplacian(GridPtr g) { return std::make_shared<const PolarLaplacian>(std::move(g)); }

inline double h1_norm(const PolarLaplacian& A, const Vec& phi) { return std::sqrt(std::max(A.energy(phi), 0.0)); }

// Residual-based quadratic convergence certificate: r_{k+1} <= K r_k^2 over the last three
// steps taken in the asymptotic regime (r_k < 0.1); steps landing at roundoff level count as passing.
struct QuadraticCertificate {
    double max_ratio = std::numeric_limits<double>::quiet_NaN();
    int pairs = 0;
    bool ok = false;
};

inline QuadraticCertificate quadratic_certificate(const std::vector<double>& r, double K = 1e3, double floor = 1e-13) {
    QuadraticCertificate q;
    q.max_ratio = 0;
    for (int k = static_cast<int>(r.size()) - 2; k >= 0 && q.pairs < 3; --k) {
        if (!(r[k] < 0.1)) break;
        ++q.pairs;
        if (r[k + 1] <= floor) continue;
        q.max_ratio = std::max(q.max_ratio, r[k + 1] / (r[k] * r[k]));
    }
    // The ratio bound alone admits fast linear convergence; also require an observed order
    // of at least 1.5 on the final step unless it hit the roundoff floor.
    const std::size_t n = r.size();
    const bool superlinear = n >= 2 && (r[n - 1] <= floor || (r[n - 2] < 1 && std::log(r[n - 1]) / std::log(r[n - 2]) >= 1.5));
    q.ok = q.pairs >= 1 && q.max_ratio <= K && superlinear;
    return q;
}

struct SolveResult {
    Vec phi;
    DiskField w;
    std::vector<double> residual_history;
    std::vector<double> step_history;  // sup norm of each accepted update
    int iterations = 0;
    int linear_iterations = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double residual_floor = 0;  // estimated rounding level; convergence accepts max(tol, floor)
    QuadraticCertificate certificate;
    double min_sv = std::numeric_limits<double>::quiet_NaN();  // filled when the Jacobian looked singular
    std::string message;
};

struct NewtonOptions {
    double tol = 1e-11;
    int max_iter = 30;
    double gmres_tol = 1e-12;
    int gmres_restart = 60;
    int gmres_max_iter = 2000;
    std::vector<Vec> deflate;  // known solutions w* to steer away from
    double deflation_shift = 1.0;
    int deflation_power = 2;

    static NewtonOptions from(const SolveConfig& c) {
        NewtonOptions o;
        o.tol = c.newton_tol;
        o.max_iter = c.max_iter;
        o.gmres_tol = c.gmres_tol;
        o.gmres_restart = c.gmres_restart;
        o.gmres_max_iter = c.gmres_max_iter;
        return o;
    }
};

inline double linearized_min_sv_h1(const Background& bg, const Vec& phi, bool restricted, unsigned seed = 12345);

// Newton's method on A phi - area N(phi) = 0, each step solved by GMRES on the
// Laplace-preconditioned system (I - A^{-1} diag(q)) d = -A^{-1} F. With deflation the
// step is rescaled by the Sherman-Morrison factor of the deflated residual M(w) F(w).
inline SolveResult newton_solve(const Background& bg, Vec phi, const NewtonOptions& opt = {}) {
    if (!phi.allFinite()) throw std::invalid_argument("newton_solve: initial guess not finite");
    SolveResult out;
    const PolarLaplacian& A = *bg.A;
    for (int it = 0;; ++it) {
        const Vec F = bg.residual(phi);
        const double r = bg.residual_norm(F, phi);
        out.residual_history.push_back(r);
        out.residual = r;
        if (!std::isfinite(r)) {
            out.message = "residual became non-finite";
            break;
        }
        out.residual_floor = bg.residual_floor(phi);
        if (r <= std::max(opt.tol, out.residual_floor)) {
            out.converged = true;
            break;
        }
        if (it == opt.max_iter) {
            out.message = "max_iter exceeded";
            break;
        }
        const Vec q = bg.weight(phi);
        const LinearMap op = [&](const Vec& x) -> Vec { return x - A.solve(q.cwiseProduct(x)); };
        const Vec rhs = -A.solve(F);
        const GmresResult g = gmres(op, rhs, opt.gmres_tol, opt.gmres_restart, opt.gmres_max_iter);
        out.linear_iterations += g.iterations;
        if (!g.converged && g.rel_residual > 1e-6) {
            out.min_sv = linearized_min_sv_h1(bg, phi, false);
            out.message = "Jacobian near-singular: linear solve stalled";
            break;
        }
        Vec d = g.x;
        if (!opt.deflate.empty()) {
            Vec grad_log = Vec::Zero(phi.size());
            const Vec w = bg.w(phi);
            for (const Vec& ws : opt.deflate) {
                const Vec diff = w - ws;
                const Vec Ad = A.apply(diff);
                const double n2 = std::max(diff.dot(Ad), 1e-300);
                const double np = std::pow(n2, 0.5 * opt.deflation_power);
                const double m = 1.0 / np + opt.deflation_shift;
                grad_log += (-opt.deflation_power / np / n2 / m) * Ad;
            }
            const double den = 1.0 - grad_log.dot(d);
            if (std::fabs(den) > 1e-12) d /= den;
        }
        double t = 1.0;
        Vec trial = phi + d;
        for (int k = 0; k < 12; ++k) {
            const double rt = bg.residual_norm(bg.residual(trial), trial);
            if (std::isfinite(rt) && rt < r * (1 - 1e-4 * t)) break;
            t *= 0.5;
            trial = phi + t * d;
        }
        out.step_history.push_back(t * d.cwiseAbs().maxCoeff());
        phi = trial;
        out.iterations = it + 1;
    }
    out.certificate = quadratic_certificate(out.residual_history);
    out.w = to_field(bg.grid, bg.w(phi));
    out.phi = std::move(phi);
    return out;
}

// Clustered at scale delta around the bubble centre. Putting the pole of the polar layout on the
// centre keeps the angular modes about the bubble decoupled in the discrete operator; with a grid
// centred elsewhere the O(h^2) mode mixing pairs the O(delta^2) radial part of phi with the
// translation kernels and swamps the O(delta^3) reduced field.
inline GridPtr solver_grid(const SolveConfig& cfg, double delta, Point center = {}) {
    return DiskGrid::clustered(cfg.n_r, cfg.n_theta, delta, center);
}

// The splitting used by newton_solve(cfg, ...): bubble ansatz at cfg.b on a grid centred there,
// or the plain splitting when no centre is given.
inline Background make_background(const SolveConfig& cfg, const PotentialCoeffs& c, const DiskField* w0 = nullptr) {
    cfg.validate();
    const Point b = cfg.b.value_or(Point{0, 0});
    GridPtr grid = w0 ? w0->grid : solver_grid(cfg, delta_of(cfg.lambda, b, c), b);
    auto A = make_laplacian(grid);
    return cfg.b ? Background::bubble(cfg.lambda, b, c, A) : Background::plain(cfg.lambda, c, A);
}

// Solve from the bubble ansatz at cfg.b (or from w = 0 when no centre is given), optionally
// deflating a first solution computed from the symmetric seed b = 0. The returned phi is
// relative to make_background(cfg, c, w0).
inline SolveResult newton_solve(const SolveConfig& cfg, const PotentialCoeffs& c, const DiskField* w0 = nullptr) {
    NewtonOptions opt = NewtonOptions::from(cfg);
    const Background bg = make_background(cfg, c, w0);
    const auto& A = bg.A;
    Vec phi = w0 ? bg.phi_of(to_vec(*w0)) : Vec::Zero(A->size());
    if (cfg.deflate_radial) {
        const Background sym = Background::bubble(cfg.lambda, {0, 0}, c, A);
        const SolveResult radial = newton_solve(sym, Vec::Zero(A->size()), opt);
        if (radial.converged) opt.deflate.push_back(to_vec(radial.w));
    }
    return newton_solve(bg, std::move(phi), opt);
}

// Span of the translation kernels: u_j = area * Z^j e^W and zeta_j = A^{-1} u_j, the discrete
// Dirichlet projections PZ^j. Orthogonality to PZ^j in H^1 is u_j^T phi = 0.
struct KernelSpace {
    Vec u[2], zeta[2];
    Eigen::Matrix2d G, Ginv;

    explicit KernelSpace(const Background& bg) {
        if (!bg.ansatz) throw std::invalid_argument("KernelSpace: needs a bubble background");
        const auto n = bg.A->size();
        for (int j = 0; j < 2; ++j) {
            u[j].resize(n);
            for (Eigen::Index k = 0; k < n; ++k)
                u[j][k] = bg.area()[k] * bg.ansatz->Z(j + 1, bg.grid->point(static_cast<std::size_t>(k))) * bg.s[k];
            zeta[j] = bg.A->solve(u[j]);
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) G(i, j) = 0.5 * (zeta[i].dot(u[j]) + zeta[j].dot(u[i]));
        const double cond = G.jacobiSvd().singularValues()(0) / G.jacobiSvd().singularValues()(1);
        if (!(cond < 1e10)) throw SolverError("KernelSpace: Gram matrix of PZ^1, PZ^2 is near-singular");
        Ginv = G.inverse();
    }

    Eigen::Vector2d moments(const Vec& x) const { return {u[0].dot(x), u[1].dot(x)}; }

    // H^1-orthogonal projection onto the complement of span{zeta}.
    Vec project(const Vec& x) const {
        const Eigen::Vector2d a = Ginv * moments(x);
        return x - a(0) * zeta[0] - a(1) * zeta[1];
    }
};

struct ProjectedResult {
    Vec phi;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    std::vector<double> residual_history;
    int iterations = 0;
    int linear_iterations = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double residual_floor = 0;
    double phi_h1 = std::numeric_limits<double>::quiet_NaN();
    Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();
    std::string message;
};

// Saddle-point problem A phi - area N(phi) = sum_j c_j u_j with u_j^T phi = 0. Each Newton
// step solves P(I - T) d = -P A^{-1} F on the constraint space; the multipliers are then
// read off as c = G^{-1} zeta^T F.
inline ProjectedResult projected_solve(const Background& bg, const KernelSpace& K, Vec phi, const NewtonOptions& opt = {}) {
    const PolarLaplacian& A = *bg.A;
    ProjectedResult out;
    out.gram = K.G;
    phi = K.project(phi);
    for (int it = 0;; ++it) {
        const Vec F = bg.residual(phi);
        out.c = K.Ginv * Eigen::Vector2d(K.zeta[0].dot(F), K.zeta[1].dot(F));
        const Vec res = F - out.c(0) * K.u[0] - out.c(1) * K.u[1];
        const double r = bg.residual_norm(res, phi);
        out.residual_history.push_back(r);
        out.residual = r;
        if (!std::isfinite(r)) {
            out.message = "residual became non-finite";
            break;
        }
        out.residual_floor = bg.residual_floor(phi);
        if (r <= std::max(opt.tol, out.residual_floor)) {
            out.converged = true;
            break;
        }
        if (it == opt.max_iter) {
            out.message = "max_iter exceeded";
            break;
        }
        const Vec q = bg.weight(phi);
        const LinearMap op = [&](const Vec& x) -> Vec { return K.project(x - A.solve(q.cwiseProduct(x))); };
        const Vec rhs = -K.project(A.solve(res));
        const GmresResult g = gmres(op, rhs, opt.gmres_tol, opt.gmres_restart, opt.gmres_max_iter);
        out.linear_iterations += g.iterations;
        if (!g.converged && g.rel_residual > 1e-6) {
            out.message = "projected linear solve stalled";
            break;
        }
        const Vec d = K.project(g.x);
        double t = 1.0;
        Vec trial = phi + d;
        for (int k = 0; k < 12; ++k) {
            const Vec Ft = bg.residual(trial);
            const Eigen::Vector2d ct = K.Ginv * Eigen::Vector2d(K.zeta[0].dot(Ft), K.zeta[1].dot(Ft));
            const double rt = bg.residual_norm(Ft - ct(0) * K.u[0] - ct(1) * K.u[1], trial);
            if (std::isfinite(rt) && rt < r * (1 - 1e-4 * t)) break;
            t *= 0.5;
            trial = phi + t * d;
        }
        phi = trial;
        out.iterations = it + 1;
    }
    out.phi_h1 = h1_norm(A, phi);
    out.phi = std::move(phi);
    return out;
}

inline ProjectedResult projected_solve(const SolveConfig& cfg, const PotentialCoeffs& c, Point b) {
    cfg.validate();
    const double delta = delta_of(cfg.lambda, b, c);
    if (b.norm() > std::pow(delta, 2.0 / 3.0))
        throw std::domain_error("projected_solve: |b| exceeds delta^{2/3}");
    auto A = make_laplacian(solver_grid(cfg, delta_of(cfg.lambda, {0, 0}, c), b));
    const Background bg = Background::bubble(cfg.lambda, b, c, A);
    const KernelSpace K(bg);
    return projected_solve(bg, K, Vec::Zero(A->size()), NewtonOptions::from(cfg));
}

// The linearization psi -> A psi - diag(q) psi around w = base + phi.
struct LinearizedOperator {
    const Background* bg = nullptr;
    Vec phi;
    Vec q;

    LinearizedOperator(const Background& b, Vec state) : bg(&b), phi(std::move(state)), q(b.weight(phi)) {}

    Vec apply(const Vec& psi) const { return bg->A->apply(psi) - q.cwiseProduct(psi); }
    // Discrete L = I - A^{-1} diag(q), self-adjoint in the H^1 (energy) inner product.
    Vec apply_preconditioned(const Vec& psi) const { return psi - bg->A->solve(q.cwiseProduct(psi)); }
};

enum class SpectrumMetric { h1, l2 };

namespace detail {

inline double min_sv_h1(const LinearizedOperator& L, const KernelSpace* K, unsigned seed) {
    const PolarLaplacian& A = *L.bg->A;
    auto project_pair = [&](VecPair p) {
        if (!K) return p;
        const Eigen::Vector2d a = K->Ginv * K->moments(p.v);
        p.v -= a(0) * K->zeta[0] + a(1) * K->zeta[1];
        p.Bv -= a(0) * K->u[0] + a(1) * K->u[1];
        return p;
    };
    VecPair start;
    start.v = seeded_vector(A.size(), seed);
    if (K) start.v = K->project(start.v);
    start.Bv = A.apply(start.v);
    const auto op = [&](const VecPair& p) {
        VecPair out;
        out.Bv = L.q.cwiseProduct(p.v);
        out.v = A.solve(out.Bv);
        return project_pair(std::move(out));
    };
    auto nearest = [](const LanczosResult& r) {
        Eigen::Index k = 0;
        (r.ritz.array() - 1.0).abs().minCoeff(&k);
        return k;
    };
    const auto done = [&](const LanczosResult& r) {
        if (r.steps < 8) return false;
        const Eigen::Index k = nearest(r);
        return r.residual_bound(k) <= 1e-10 * std::max(1.0, std::fabs(r.ritz(k)));
    };
    const LanczosResult r = lanczos(op, start, std::min<int>(400, static_cast<int>(A.size())), done);
    const Eigen::Index k = nearest(r);
    if (r.residual_bound(k) > 1e-6 * std::max(1.0, std::fabs(r.ritz(k))))
        throw SolverError("linearized_min_sv: Lanczos did not converge");
    return std::fabs(1.0 - r.ritz(k));
}

// Smallest |mu| of (A - Q) v = mu M v by inverse iteration (M = cell areas).
inline double min_sv_l2(const LinearizedOperator& L, unsigned seed) {
    const PolarLaplacian& A = *L.bg->A;
    const Vec M = L.bg->measure();
    Vec v = seeded_vector(A.size(), seed);
    v /= std::sqrt(v.dot(M.cwiseProduct(v)));
    double mu = std::numeric_limits<double>::quiet_NaN();
    const LinearMap op = [&](const Vec& x) -> Vec { return L.apply_preconditioned(x); };
    for (int it = 0; it < 300; ++it) {
        const GmresResult g = gmres(op, A.solve(M.cwiseProduct(v)), 1e-12);
        if (!g.converged && g.rel_residual > 1e-6) throw SolverError("linearized_min_sv: inner solve failed");
        Vec x = g.x;
        x /= std::sqrt(x.dot(M.cwiseProduct(x)));
        const double next = x.dot(L.apply(x));
        v = x;
        if (std::isfinite(mu) && std::fabs(next - mu) <= 1e-11 * std::fabs(next)) return std::fabs(next);
        mu = next;
    }
    throw SolverError("linearized_min_sv: inverse iteration did not converge");
}

}  // namespace detail

// Smallest singular value of the linearized operator. In the H^1 metric this is
// min |1 - tau| over the spectrum of A^{-1} diag(q), optionally restricted to the
// H^1-orthogonal complement of span{PZ^1, PZ^2}. The L^2 metric (no restriction) reports the
// smallest |mu| of (A - Q) v = mu M v, which at lambda = 0 is the first Dirichlet eigenvalue.
inline double linearized_min_sv(const LinearizedOperator& L, bool restricted_to_Kperp, SpectrumMetric metric = SpectrumMetric::h1,
                                unsigned seed = 12345) {
    if (metric == SpectrumMetric::l2) {
        if (restricted_to_Kperp) throw std::invalid_argument("linearized_min_sv: restriction only in the H1 metric");
        return detail::min_sv_l2(L, seed);
    }
    if (!restricted_to_Kperp) return detail::min_sv_h1(L, nullptr, seed);
    const KernelSpace K(*L.bg);
    return detail::min_sv_h1(L, &K, seed);
}

inline double linearized_min_sv_h1(const Background& bg, const Vec& phi, bool restricted, unsigned seed) {
    return linearized_min_sv(LinearizedOperator(bg, phi), restricted, SpectrumMetric::h1, seed);
}

struct RefinementCheck {
    double max_diff = 0;   // sup over coarse nodes of |w_coarse - w_fine|, i.e. of the phi difference
    double phi_scale = 0;  // sup |phi| on the coarse grid
    double relative = 0;   // max_diff / phi_scale
    bool fine_converged = false;
    int fine_iterations = 0;
};

// Re-solves on the doubled grid (same radial map and centre) and compares with the coarse
// solution. Coarse ring i sits midway in the map coordinate between fine rings 2i and 2i+1,
// and coarse angle j coincides with fine angle 2j.
inline RefinementCheck grid_doubling_check(const Background& coarse, const Vec& phi, const NewtonOptions& opt = {}) {
    const DiskGrid& g = *coarse.grid;
    auto fg = std::make_shared<const DiskGrid>(2 * g.n_r(), 2 * g.n_theta(), g.map(), g.center());
    auto A = make_laplacian(fg);
    const Background fine = coarse.ansatz ? Background::bubble(*coarse.ansatz, A) : Background::plain(coarse.lambda, coarse.coeffs, A);
    const int m = g.n_theta(), fm = fg->n_theta();
    Vec phi0(A->size());
    for (int i = 0; i < fg->n_r(); ++i)
        for (int j = 0; j < fm; ++j) phi0[static_cast<Eigen::Index>(fg->index(i, j))] = phi[static_cast<Eigen::Index>(g.index(i / 2, j / 2))];
    const SolveResult r = newton_solve(fine, phi0, opt);
    RefinementCheck out;
    out.fine_converged = r.converged;
    out.fine_iterations = r.iterations;
    // The base state is the same analytic function on both grids, so w differs by phi alone;
    // comparing phi keeps the averaging error of the steep base out of the measurement.
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < m; ++j) {
            const double f = 0.5 * (r.phi[static_cast<Eigen::Index>(fg->index(2 * i, 2 * j))] +
                                    r.phi[static_cast<Eigen::Index>(fg->index(2 * i + 1, 2 * j))]);
            out.max_diff = std::max(out.max_diff, std::fabs(phi[static_cast<Eigen::Index>(g.index(i, j))] - f));
        }
    out.phi_scale = phi.cwiseAbs().maxCoeff();
    out.relative = out.phi_scale > 0 ? out.max_diff / out.phi_scale : out.max_diff;
    return out;
}

// u(x) = w(x^2) - 4 pi G(x, 0) on the folded grid: same ring count, radii r_i^{1/2}, twice the
// angles, so node (i, j) of the x-grid lands exactly on node (i, j mod n_theta) of w. A recentred
// w is first interpolated onto those nodes.
inline DiskField pull_back(const DiskField& w) {
    const DiskGrid& g = *w.grid;
    auto xg = std::make_shared<const DiskGrid>(g.n_r(), 2 * g.n_theta(), g.map().folded());
    DiskField u(xg);
    if (g.centered()) {
        for (int i = 0; i < g.n_r(); ++i) {
            const double log_r = std::log(xg->r(i));
            for (int j = 0; j < xg->n_theta(); ++j) u(i, j) = w(i, j % g.n_theta()) + 2 * log_r;
        }
        return u;
    }
    const FieldInterpolator at(w);
    const DiskGrid yg(g.n_r(), g.n_theta(), g.map());
    parallel_for(static_cast<std::size_t>(g.n_r()), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const double log_r = std::log(xg->r(i));
        for (int j = 0; j < g.n_theta(); ++j) u(i, j) = at(yg.point(i, j)) + 2 * log_r;
        for (int j = g.n_theta(); j < xg->n_theta(); ++j) u(i, j) = u(i, j - g.n_theta());
    });
    return u;
}

// Mass identities for a solution w of the regularized problem:
// y-side 2 (lambda/4) int V(y^{1/2}) e^w and x-side lambda int V e^u on the pulled-back grid.
struct MassReport {
    double y_side = 0, x_side = 0;
    double concentration = 0;  // fraction of the mass in |x| <= radius, i.e. |y| <= radius^2
};

inline MassReport mass_identity(const DiskField& w, double lambda, const PotentialCoeffs& c, double radius = 0.1) {
    MassReport m;
    const DiskGrid& g = *w.grid;
    std::vector<double> ring(g.n_r()), inner_y(g.n_r());
    for (int i = 0; i < g.n_r(); ++i) {
        double s = 0;
        double s_in = 0;
        for (int j = 0; j < g.n_theta(); ++j) {
            const Point y = g.point(i, j);
            const double v = eval_V_half(c, y) * std::exp(w(i, j)) * g.jacobian(i, j);
            s += v;
            if (y.norm() <= radius * radius) s_in += v;
        }
        ring[i] = s * g.area(i);
        inner_y[i] = s_in * g.area(i);
    }
    m.y_side = 0.5 * lambda * pairwise_sum(ring);
    m.concentration = 0.5 * lambda * pairwise_sum(inner_y) / m.y_side;
    const DiskField u = pull_back(w);
    const DiskGrid& xg = *u.grid;
    for (int i = 0; i < xg.n_r(); ++i) {
        double s = 0;
        for (int j = 0; j < xg.n_theta(); ++j) s += eval_V(c, xg.point(i, j)) * std::exp(u(i, j));
        ring[i] = lambda * s * xg.area(i);
    }
    m.x_side = pairwise_sum(ring);
    return m;
}

}  // namespace liouville
