#pragma once

#include <complex>
#include <memory>

namespace uconv {

// FFTW wrappers. Plans are created under a global lock; execution is reentrant.
// Forward uses exp(-2 pi i k x / G), backward exp(+...); neither is normalised.
void fft2d_forward(const std::complex<double>* in, std::complex<double>* out, int n0, int n1);
void fft2d_backward(const std::complex<double>* in, std::complex<double>* out, int n0, int n1);

class Fft1d {
public:
    Fft1d(int n, bool forward);
    ~Fft1d();
    Fft1d(const Fft1d&) = delete;
    Fft1d& operator=(const Fft1d&) = delete;
    // out may alias in
    void run(const std::complex<double>* in, std::complex<double>* out) const;
    int size() const { return n_; }

private:
    int n_;
    void* plan_;
    void* plan_inplace_;
};

} // namespace uconv
