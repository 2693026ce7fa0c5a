#pragma once

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace liouville {

// Batched real-to-half-complex transforms along contiguous rows of length n. FFTW plans are
// built with FFTW_ESTIMATE so results are reproducible run to run.
class RowFFT {
public:
    RowFFT(int rows, int n) : rows_(rows), n_(n), nc_(n / 2 + 1) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(rows) * n);
        cplx_ = fftw_alloc_complex(static_cast<std::size_t>(rows) * nc_);
        if (!real_ || !cplx_) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_many_dft_r2c(1, &n_, rows, real_, nullptr, 1, n_, cplx_, nullptr, 1, nc_, FFTW_ESTIMATE);
        inv_ = fftw_plan_many_dft_c2r(1, &n_, rows, cplx_, nullptr, 1, nc_, real_, nullptr, 1, n_, FFTW_ESTIMATE);
    }
    RowFFT(const RowFFT&) = delete;
    RowFFT& operator=(const RowFFT&) = delete;
    ~RowFFT() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(cplx_);
    }

    int rows() const { return rows_; }
    int n() const { return n_; }
    int n_modes() const { return nc_; }

    // in: rows*n reals; out: rows*(n/2+1) coefficients, unnormalized.
    void forward(const double* in, std::complex<double>* out) const {
        std::lock_guard<std::mutex> lock(exec_mutex_);
        std::memcpy(real_, in, sizeof(double) * rows_ * n_);
        fftw_execute(fwd_);
        std::memcpy(static_cast<void*>(out), cplx_, sizeof(fftw_complex) * rows_ * nc_);
    }

    // Inverse including the 1/n normalization.
    void inverse(const std::complex<double>* in, double* out) const {
        std::lock_guard<std::mutex> lock(exec_mutex_);
        std::memcpy(cplx_, in, sizeof(fftw_complex) * rows_ * nc_);
        fftw_execute(inv_);
        const double s = 1.0 / n_;
        for (int k = 0; k < rows_ * n_; ++k) out[k] = real_[k] * s;
    }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    int rows_, n_, nc_;
    double* real_ = nullptr;
    fftw_complex* cplx_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
    mutable std::mutex exec_mutex_;
};

}  // namespace liouville
