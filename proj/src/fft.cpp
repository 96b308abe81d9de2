#include "uconv/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace uconv {

namespace {

std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

void run2d(const std::complex<double>* in, std::complex<double>* out, int n0, int n1, int sign) {
    std::vector<std::complex<double>> buf(in, in + static_cast<std::size_t>(n0) * n1);
    fftw_plan p;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        p = fftw_plan_dft_2d(n0, n1, as_fftw(buf.data()), as_fftw(out), sign, FFTW_ESTIMATE);
    }
    fftw_execute(p);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(p);
}

} // namespace

void fft2d_forward(const std::complex<double>* in, std::complex<double>* out, int n0, int n1) {
    run2d(in, out, n0, n1, FFTW_FORWARD);
}

void fft2d_backward(const std::complex<double>* in, std::complex<double>* out, int n0, int n1) {
    run2d(in, out, n0, n1, FFTW_BACKWARD);
}

Fft1d::Fft1d(int n, bool forward) : n_(n) {
    std::vector<std::complex<double>> a(n), b(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    int sign = forward ? FFTW_FORWARD : FFTW_BACKWARD;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan_ = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), sign, flags);
    plan_inplace_ = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(a.data()), sign, flags);
}

Fft1d::~Fft1d() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inplace_));
}

void Fft1d::run(const std::complex<double>* in, std::complex<double>* out) const {
    auto* i = const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in));
    auto* o = reinterpret_cast<fftw_complex*>(out);
    if (in == out) fftw_execute_dft(static_cast<fftw_plan>(plan_inplace_), i, o);
    else fftw_execute_dft(static_cast<fftw_plan>(plan_), i, o);
}

} // namespace uconv
