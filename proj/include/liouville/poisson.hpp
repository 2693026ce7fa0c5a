#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "disk_grid.hpp"
#include "fft.hpp"

namespace liouville {

using Vec = Eigen::VectorXd;

// Weighted Dirichlet Laplacian on a DiskGrid: cell-centred finite volumes in r (zero flux
// through the pole, ghost value 0 at r = 1), Fourier modes in theta. A is symmetric positive
// definite; A u = area * f discretizes -Laplace(u) = f.
class PolarLaplacian {
public:
    explicit PolarLaplacian(GridPtr grid) : g_(std::move(grid)), fft_(g_->n_r(), g_->n_theta()) {
        const int n = g_->n_r();
        const double dth = g_->dtheta();
        lower_.assign(n, 0.0);
        upper_.assign(n, 0.0);
        ang_.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (i > 0) lower_[i] = g_->face(i) * dth / (g_->r(i) - g_->r(i - 1));
            upper_[i] = i + 1 < n ? g_->face(i + 1) * dth / (g_->r(i + 1) - g_->r(i)) : g_->face(n) * dth / (1.0 - g_->r(n - 1));
            ang_[i] = g_->area(i) / (g_->r(i) * g_->r(i));
        }
        // Thomas factorization for every angular mode.
        const int nk = fft_.n_modes();
        cprime_.resize(static_cast<std::size_t>(nk) * n);
        inv_den_.resize(static_cast<std::size_t>(nk) * n);
        for (int k = 0; k < nk; ++k) {
            double* cp = &cprime_[static_cast<std::size_t>(k) * n];
            double* id = &inv_den_[static_cast<std::size_t>(k) * n];
            for (int i = 0; i < n; ++i) {
                const double diag = lower_[i] + upper_[i] + ang_[i] * k * k;
                const double a = i > 0 ? -lower_[i] : 0.0;
                const double den = diag - (i > 0 ? a * cp[i - 1] : 0.0);
                id[i] = 1.0 / den;
                cp[i] = i + 1 < n ? -upper_[i] * id[i] : 0.0;
            }
        }
        area_.resize(static_cast<Eigen::Index>(g_->size()));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < g_->n_theta(); ++j) area_(static_cast<Eigen::Index>(g_->index(i, j))) = g_->area(i);
    }

    const GridPtr& grid() const { return g_; }
    const Vec& area() const { return area_; }
    Eigen::Index size() const { return area_.size(); }

    Vec apply(const Vec& u) const {
        const int n = g_->n_r(), m = g_->n_theta();
        Vec out(u.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                const std::size_t k = g_->index(i, j);
                double v = (lower_[i] + upper_[i]) * u[k];
                if (i > 0) v -= lower_[i] * u[k - m];
                if (i + 1 < n) v -= upper_[i] * u[k + m];
                out[k] = v;
            }
        std::vector<std::complex<double>> spec(static_cast<std::size_t>(n) * fft_.n_modes());
        fft_.forward(u.data(), spec.data());
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < fft_.n_modes(); ++k) spec[static_cast<std::size_t>(i) * fft_.n_modes() + k] *= ang_[i] * k * k;
        Vec ang(u.size());
        fft_.inverse(spec.data(), ang.data());
        return out + ang;
    }

    // Solves A u = b.
    Vec solve(const Vec& b) const {
        const int n = g_->n_r(), nk = fft_.n_modes();
        std::vector<std::complex<double>> spec(static_cast<std::size_t>(n) * nk);
        fft_.forward(b.data(), spec.data());
        std::vector<std::complex<double>> d(n);
        for (int k = 0; k < nk; ++k) {
            const double* cp = &cprime_[static_cast<std::size_t>(k) * n];
            const double* id = &inv_den_[static_cast<std::size_t>(k) * n];
            for (int i = 0; i < n; ++i) {
                const std::complex<double> rhs = spec[static_cast<std::size_t>(i) * nk + k];
                d[i] = (rhs + (i > 0 ? lower_[i] * d[i - 1] : 0.0)) * id[i];
            }
            for (int i = n - 2; i >= 0; --i) d[i] -= cp[i] * d[i + 1];
            for (int i = 0; i < n; ++i) spec[static_cast<std::size_t>(i) * nk + k] = d[i];
        }
        Vec u(b.size());
        fft_.inverse(spec.data(), u.data());
        return u;
    }

    double energy(const Vec& u) const { return u.dot(apply(u)); }

    // Per-node bound on |A| |u|, with the angular term bounded through the top mode. Scaled
    // by machine epsilon it estimates the rounding floor of apply(u).
    Vec abs_bound(const Vec& u) const {
        const int n = g_->n_r(), m = g_->n_theta();
        const double kmax = 0.5 * m;
        Vec out(u.size());
        for (int i = 0; i < n; ++i) {
            const double ring_max = u.segment(static_cast<Eigen::Index>(i) * m, m).cwiseAbs().maxCoeff();
            for (int j = 0; j < m; ++j) {
                const std::size_t k = g_->index(i, j);
                double v = (lower_[i] + upper_[i]) * std::fabs(u[k]) + ang_[i] * kmax * kmax * ring_max;
                if (i > 0) v += lower_[i] * std::fabs(u[k - m]);
                if (i + 1 < n) v += upper_[i] * std::fabs(u[k + m]);
                out[k] = v;
            }
        }
        return out;
    }

private:
    GridPtr g_;
    RowFFT fft_;
    std::vector<double> lower_, upper_, ang_, cprime_, inv_den_;
    Vec area_;
};

inline Vec to_vec(const DiskField& f) { return Eigen::Map<const Vec>(f.values.data(), static_cast<Eigen::Index>(f.values.size())); }

inline DiskField to_field(GridPtr g, const Vec& v) {
    return DiskField(std::move(g), std::vector<double>(v.data(), v.data() + v.size()));
}

// Dirichlet solution of -Laplace(u) = rhs.
inline DiskField solve_poisson(const DiskField& rhs, const PolarLaplacian* op = nullptr) {
    std::unique_ptr<PolarLaplacian> own;
    if (!op) {
        own = std::make_unique<PolarLaplacian>(rhs.grid);
        op = own.get();
    }
    const Vec b = op->area().cwiseProduct(to_vec(rhs));
    if (!b.allFinite()) throw std::domain_error("solve_poisson: non-finite right-hand side");
    return to_field(rhs.grid, op->solve(b));
}

}  // namespace liouville
