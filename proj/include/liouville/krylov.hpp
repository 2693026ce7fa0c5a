#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace liouville {

using Vec = Eigen::VectorXd;
using LinearMap = std::function<Vec(const Vec&)>;

struct GmresResult {
    Vec x;
    int iterations = 0;
    double rel_residual = 0;
    bool converged = false;
};

// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations. Starts from x0 if given.
inline GmresResult gmres(const LinearMap& op, const Vec& b, double rtol = 1e-12, int restart = 60, int max_iter = 1000,
                         const Vec* x0 = nullptr) {
    GmresResult out;
    const Eigen::Index n = b.size();
    out.x = x0 ? *x0 : Vec::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0) {
        out.x.setZero();
        out.converged = true;
        return out;
    }
    std::vector<Vec> V;
    Eigen::MatrixXd H;
    Vec cs, sn, g;
    while (out.iterations < max_iter) {
        Vec r = b - (out.x.squaredNorm() > 0 ? op(out.x) : Vec::Zero(n));
        double beta = r.norm();
        out.rel_residual = beta / bnorm;
        if (out.rel_residual <= rtol) {
            out.converged = true;
            return out;
        }
        V.assign(1, r / beta);
        H = Eigen::MatrixXd::Zero(restart + 1, restart);
        cs = Vec::Zero(restart);
        sn = Vec::Zero(restart);
        g = Vec::Zero(restart + 1);
        g(0) = beta;
        int k = 0;
        for (; k < restart && out.iterations < max_iter; ++k) {
            ++out.iterations;
            Vec w = op(V[k]);
            for (int i = 0; i <= k; ++i) {
                H(i, k) = w.dot(V[i]);
                w -= H(i, k) * V[i];
            }
            H(k + 1, k) = w.norm();
            for (int i = 0; i < k; ++i) {
                const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
                H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
                H(i, k) = t;
            }
            const double den = std::hypot(H(k, k), H(k + 1, k));
            cs(k) = den == 0 ? 1 : H(k, k) / den;
            sn(k) = den == 0 ? 0 : H(k + 1, k) / den;
            const double hk1 = H(k + 1, k);
            H(k, k) = den;
            H(k + 1, k) = 0;
            g(k + 1) = -sn(k) * g(k);
            g(k) = cs(k) * g(k);
            out.rel_residual = std::fabs(g(k + 1)) / bnorm;
            if (out.rel_residual <= rtol || hk1 == 0) {
                ++k;
                break;
            }
            V.push_back(w / hk1);
        }
        const Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        for (int i = 0; i < k; ++i) out.x += y(i) * V[i];
        if (out.rel_residual <= rtol) {
            // Confirm with the true residual; rounding can make the recurrence optimistic.
            const double true_rel = (b - op(out.x)).norm() / bnorm;
            out.rel_residual = true_rel;
            if (true_rel <= 10 * rtol) {
                out.converged = true;
                return out;
            }
        }
    }
    return out;
}

// Lanczos with full reorthogonalization for an operator that is self-adjoint in the inner
// product <x, y> = x^T B y. The caller supplies op returning both S x and B (S x) so no extra
// applications of B are needed; B x0 is needed for the start vector.
struct LanczosResult {
    Vec ritz;            // ascending
    Vec residual_bound;  // |beta_m s_{m,k}| for each Ritz value
    int steps = 0;
};

struct VecPair {
    Vec v, Bv;
};

inline LanczosResult lanczos(const std::function<VecPair(const VecPair&)>& op, VecPair start, int max_steps,
                             const std::function<bool(const LanczosResult&)>& done) {
    std::vector<VecPair> Q;
    std::vector<double> alpha, beta;
    const double s0 = std::sqrt(start.v.dot(start.Bv));
    if (!(s0 > 0)) throw std::invalid_argument("lanczos: start vector has zero norm");
    start.v /= s0;
    start.Bv /= s0;
    Q.push_back(start);
    LanczosResult res;
    for (int m = 0; m < max_steps; ++m) {
        VecPair w = op(Q[m]);
        alpha.push_back(w.v.dot(Q[m].Bv));
        // two passes of full reorthogonalization in the B inner product
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : Q) {
                const double h = w.v.dot(q.Bv);
                w.v -= h * q.v;
                w.Bv -= h * q.Bv;
            }
        const double b = std::sqrt(std::max(w.v.dot(w.Bv), 0.0));
        const int k = m + 1;
        Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            Tm(i, i) = alpha[i];
            if (i + 1 < k) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
        res.ritz = es.eigenvalues();
        res.residual_bound = (b * es.eigenvectors().row(k - 1).transpose()).cwiseAbs();
        res.steps = k;
        if (b < 1e-14 * std::max(1.0, res.ritz.cwiseAbs().maxCoeff()) || done(res)) return res;
        beta.push_back(b);
        w.v /= b;
        w.Bv /= b;
        Q.push_back(std::move(w));
    }
    return res;
}

// Deterministic pseudo-random start vector.
inline Vec seeded_vector(Eigen::Index n, unsigned seed = 12345) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

}  // namespace liouville
