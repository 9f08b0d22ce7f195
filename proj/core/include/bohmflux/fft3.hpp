#ifndef BOHMFLUX_FFT3_HPP
#define BOHMFLUX_FFT3_HPP

#include <array>
#include <complex>
#include <vector>

namespace bohmflux {

/// Global knob for worker threads (trajectory ensembles and FFT plans).
/// 0 means "use hardware concurrency".
void set_thread_count(int n);
int thread_count();

/// In-place 3D complex DFTs on contiguous row-major data (x fastest).
/// forward: exp(-i k·x) sign convention, unnormalized;
/// inverse: exp(+i k·x), scaled by 1/N so inverse(forward(f)) == f.
class Fft3 {
public:
    Fft3(int nx, int ny, int nz);
    ~Fft3();

    Fft3(const Fft3&) = delete;
    Fft3& operator=(const Fft3&) = delete;

    void forward(std::complex<double>* data) const;
    void inverse(std::complex<double>* data) const;

    int nx() const { return n_[0]; }
    int ny() const { return n_[1]; }
    int nz() const { return n_[2]; }

private:
    std::array<int, 3> n_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

/// DFT wavenumber for index j on an n-point axis with spacing h:
/// k = 2π·m/(n·h) with m the signed FFT frequency index.
double fft_wavenumber(int j, int n, double h);

}

#endif
