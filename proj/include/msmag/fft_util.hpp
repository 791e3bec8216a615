#ifndef MSMAG_FFT_UTIL_HPP
#define MSMAG_FFT_UTIL_HPP

#include <complex>
#include <fftw3.h>
#include <mutex>
#include <vector>

namespace msmag {

// FFTW plan creation/destruction is not thread-safe; executions on distinct
// buffers are. All planning goes through this lock.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// Real-to-complex 2D transform pair over a fixed n0 x n1 row-major grid.
// The inverse is unnormalized (scale by 1/(n0*n1) lives with the caller).
class FftR2C2D {
public:
    int n0 = 0, n1 = 0;
    std::vector<double> real;               // n0 * n1
    std::vector<std::complex<double>> spec; // n0 * (n1/2 + 1)

    FftR2C2D(int rows, int cols) : n0(rows), n1(cols) {
        real.assign(static_cast<std::size_t>(n0) * n1, 0.0);
        spec.assign(static_cast<std::size_t>(n0) * (n1 / 2 + 1), {0.0, 0.0});
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(n0, n1, real.data(),
                                    reinterpret_cast<fftw_complex*>(spec.data()),
                                    FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_2d(n0, n1,
                                    reinterpret_cast<fftw_complex*>(spec.data()),
                                    real.data(), FFTW_ESTIMATE);
    }

    ~FftR2C2D() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }

    FftR2C2D(const FftR2C2D&) = delete;
    FftR2C2D& operator=(const FftR2C2D&) = delete;

    void forward() { fftw_execute(fwd_); }
    void inverse() { fftw_execute(inv_); }

    int spec_cols() const { return n1 / 2 + 1; }

private:
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

} // namespace msmag

#endif
