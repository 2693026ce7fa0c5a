#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "fft.hpp"
#include "geometry.hpp"

namespace liouville {

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best, double achieved)
        : std::runtime_error(what), best_value(best), achieved_error(achieved) {}
    double best_value;
    double achieved_error;
};

// Harmonic extension into the unit disk of a smooth boundary trace g(theta), built from the
// trapezoid-rule Fourier coefficients of g: u(z) = Re sum_k d_k z^k.
class HarmonicExtension {
public:
    HarmonicExtension() = default;

    template <class Trace>
    static HarmonicExtension from_trace(Trace&& g, int n_nodes = 512, double rel_tol = 1e-12) {
        if (n_nodes < 8 || n_nodes % 2) throw std::invalid_argument("HarmonicExtension: n_nodes must be even and >= 8");
        std::vector<double> samples(n_nodes);
        for (int j = 0; j < n_nodes; ++j) samples[j] = g(kTwoPi * j / n_nodes);
        RowFFT fft(1, n_nodes);
        std::vector<std::complex<double>> c(fft.n_modes());
        fft.forward(samples.data(), c.data());
        HarmonicExtension h;
        double scale = 0;
        for (auto& v : c) {
            v /= static_cast<double>(n_nodes);
            scale = std::max(scale, std::abs(v));
        }
        const int half = n_nodes / 2;
        // The highest resolved modes must be negligible, otherwise the trace is under-sampled.
        const double tail = std::max(std::abs(c[half]), std::abs(c[half - 1]));
        h.tail_ = scale > 0 ? tail / scale : 0.0;
        if (h.tail_ > rel_tol)
            throw QuadratureError("HarmonicExtension: boundary trace under-resolved", c[0].real(), h.tail_);
        int last = 0;
        for (int k = 0; k < half; ++k)
            if (std::abs(c[k]) > 1e-18 * scale) last = k;
        h.d_.resize(last + 1);
        h.d_[0] = c[0];
        for (int k = 1; k <= last; ++k) h.d_[k] = 2.0 * c[k];
        return h;
    }

    double operator()(Point x) const {
        if (d_.empty()) return 0.0;
        const std::complex<double> z = x.complex();
        std::complex<double> acc = d_.back();
        for (int k = static_cast<int>(d_.size()) - 2; k >= 0; --k) acc = acc * z + d_[k];
        return acc.real();
    }

    // Gradient of u at x: (d/dx1, d/dx2) = (Re f', -Im f') for f = sum d_k z^k.
    Point gradient(Point x) const {
        if (d_.size() < 2) return {0, 0};
        const std::complex<double> z = x.complex();
        std::complex<double> acc = static_cast<double>(d_.size() - 1) * d_.back();
        for (int k = static_cast<int>(d_.size()) - 2; k >= 1; --k) acc = acc * z + static_cast<double>(k) * d_[k];
        return {acc.real(), -acc.imag()};
    }

    int n_terms() const { return static_cast<int>(d_.size()); }
    double tail() const { return tail_; }

private:
    std::vector<std::complex<double>> d_;
    double tail_ = 0;
};

}  // namespace liouville
