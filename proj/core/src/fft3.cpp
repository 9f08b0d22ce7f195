#include "bohmflux/fft3.hpp"

#include <fftw3.h>

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bohmflux {

namespace {

std::atomic<int> g_threads{0};
std::mutex g_plan_mutex;  // FFTW planning is not thread-safe

int effective_threads() {
    const int n = g_threads.load();
    if (n > 0) return n;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void init_fftw_threads() {
#ifdef BOHMFLUX_FFTW_THREADS
    static std::once_flag once;
    std::call_once(once, [] { fftw_init_threads(); });
    fftw_plan_with_nthreads(effective_threads());
#endif
}

}

void set_thread_count(int n) { g_threads.store(n); }
int thread_count() { return effective_threads(); }

Fft3::Fft3(int nx, int ny, int nz) : n_{nx, ny, nz} {
    if (nx < 1 || ny < 1 || nz < 1)
        throw std::invalid_argument("Fft3: dims must be positive");

    std::lock_guard<std::mutex> lock(g_plan_mutex);
    init_fftw_threads();
    // Plans are created against a scratch buffer and reused on caller data;
    // FFTW_ESTIMATE keeps planning instant and alignment-agnostic (we pass
    // FFTW_UNALIGNED so vectors from std::vector are fine).
    std::vector<std::complex<double>> scratch(static_cast<size_t>(nx) * ny * nz);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    // Data is row-major with x fastest, so the FFTW dimension order is (z,y,x).
    plan_fwd_ = fftw_plan_dft_3d(nz, ny, nx, ptr, ptr, FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_bwd_ = fftw_plan_dft_3d(nz, ny, nx, ptr, ptr, FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("FFTW planning failed");
}

Fft3::~Fft3() {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft3::forward(std::complex<double>* data) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), ptr, ptr);
}

void Fft3::inverse(std::complex<double>* data) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), ptr, ptr);
    const double scale = 1.0 / (static_cast<double>(n_[0]) * n_[1] * n_[2]);
    const size_t total = static_cast<size_t>(n_[0]) * n_[1] * n_[2];
    for (size_t i = 0; i < total; ++i) data[i] *= scale;
}

double fft_wavenumber(int j, int n, double h) {
    const int m = (j <= n / 2) ? j : j - n;
    return 2.0 * M_PI * m / (n * h);
}

}
