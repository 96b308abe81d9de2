#pragma once

// Independent reference computations shared by the tests and the acceptance runner.
// Nothing here goes through the library's FFT or coefficient code.

#include "uconv/character.hpp"
#include "uconv/oscint.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// S_{M,N} g(x, y) = int int g(x - s, y - t) D_M(s) D_N(t) ds dt by the K x K trapezoid rule,
// which is exact up to aliasing of coefficients beyond K - max(M, N).
inline cplx dirichlet_partial_sum(const uconv::CharacterSpec& spec, std::int64_t M, std::int64_t N, double x,
                                  double y, int K = 1024) {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> dm(K), dn(K);
    for (int i = 0; i < K; ++i) {
        double u = static_cast<double>(i) / K;
        dm[i] = uconv::dirichlet(M, u);
        dn[i] = uconv::dirichlet(N, u);
    }
    cplx acc = 0.0;
    for (int i = 0; i < K; ++i) {
        double s = x - static_cast<double>(i) / K;
        cplx row = 0.0;
        for (int j = 0; j < K; ++j) {
            double t = y - static_cast<double>(j) / K;
            double turns = uconv::eval(spec.phase, s, t) + std::fmod(spec.ks * s, 1.0) + std::fmod(spec.kt * t, 1.0);
            row += std::polar(dn[j], two_pi * turns);
        }
        acc += dm[i] * row;
    }
    return acc / (static_cast<double>(K) * K);
}

// 1-D coefficient int_0^1 e^{2 pi i (p(s) - k s)} ds by Gauss-Legendre panels.
inline cplx coefficient_1d(const uconv::TrigPoly& p, std::int64_t k, int panels = 64) {
    const double two_pi = 2.0 * std::numbers::pi;
    return uconv::integrate_gl(
        [&](double s) { return std::polar(1.0, two_pi * (uconv::eval(p, s) - static_cast<double>(k) * s)); }, 0.0,
        1.0, 32, panels);
}

} // namespace oracle
