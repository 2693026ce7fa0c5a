#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "disk_grid.hpp"
#include "fft.hpp"

namespace liouville {

// Evaluates a DiskField at arbitrary points: trigonometric interpolation along each ring and
// cubic Lagrange interpolation across rings in the map coordinate s. Rings are continued through
// the pole by reflection (ring i at angle theta + pi) and the boundary value closes the outer end.
class FieldInterpolator {
public:
    explicit FieldInterpolator(const DiskField& f) : f_(f), m_(f.grid->n_theta()) {
        const int n = f.grid->n_r();
        RowFFT fft(n, m_);
        coef_.resize(static_cast<std::size_t>(n) * fft.n_modes());
        nk_ = fft.n_modes();
        fft.forward(f.values.data(), coef_.data());
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < nk_; ++k) {
                const double wgt = (k == 0 || 2 * k == m_) ? 1.0 : 2.0;
                coef_[static_cast<std::size_t>(i) * nk_ + k] *= wgt / m_;
            }
    }

    double operator()(Point x) const {
        const DiskGrid& g = *f_.grid;
        const int n = g.n_r();
        const Point z = g.centered() ? x : g.to_z(x);
        const double rho = z.norm();
        if (rho >= 1) return f_.boundary_value;
        const double theta = std::atan2(z.x2, z.x1);
        const double t = g.map().inverse(rho) * n - 0.5;  // ring i sits at t = i
        // window of 4 nodes; index -1-i is ring i reflected, index n is the boundary at t = n - 1/2
        int lo = static_cast<int>(std::floor(t)) - 1;
        lo = std::min(lo, n - 3);
        double ts[4], vs[4];
        for (int q = 0; q < 4; ++q) {
            const int idx = lo + q;
            if (idx >= n) {
                ts[q] = n - 0.5;
                vs[q] = f_.boundary_value;
            } else if (idx < 0) {
                ts[q] = idx;
                vs[q] = ring_value(-1 - idx, theta + kPi);
            } else {
                ts[q] = idx;
                vs[q] = ring_value(idx, theta);
            }
        }
        double out = 0;
        for (int a = 0; a < 4; ++a) {
            double l = 1;
            for (int b = 0; b < 4; ++b)
                if (b != a) l *= (t - ts[b]) / (ts[a] - ts[b]);
            out += l * vs[a];
        }
        return out;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    double ring_value(int i, double theta) const {
        const std::complex<double>* c = &coef_[static_cast<std::size_t>(i) * nk_];
        const std::complex<double> e(std::cos(theta), std::sin(theta));
        std::complex<double> acc = 0;
        for (int k = nk_ - 1; k >= 0; --k) acc = acc * e + c[k];
        return acc.real();
    }

    const DiskField& f_;
    int m_, nk_;
    std::vector<std::complex<double>> coef_;
};

}  // namespace liouville
