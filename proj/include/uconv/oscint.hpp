#pragma once

#include "uconv/trigpoly.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace uconv {

using cplx = std::complex<double>;

// D_N(t) = sin(2 pi (N + 1/2) t) / sin(pi t), 2N + 1 at integers.
double dirichlet(std::int64_t N, double t);

// Sine integral, |error| ~ 1e-15.
double sine_integral(double x);

// int_0^{1/2} int_0^{1/2} sin(lambda s t) ds/s dt/t = int_0^{lambda/4} Si(u)/u du
double fefferman_sine(double lambda);

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};
const GaussRule& gauss_legendre(int n);

// int_a^b f using `panels` equal panels of an n-point rule
template <class F>
auto integrate_gl(F&& f, double a, double b, int n = 32, int panels = 1) {
    const GaussRule& g = gauss_legendre(n);
    double h = (b - a) / panels;
    decltype(f(a)) acc{};
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h, half = 0.5 * h, mid = lo + half;
        decltype(f(a)) part{};
        for (int i = 0; i < n; ++i) part += g.w[i] * f(mid + half * g.x[i]);
        acc += part * half;
    }
    return acc;
}

// Phase theta(t) in radians for the integrand e^{i theta(t)}.
class Phase1D {
public:
    virtual ~Phase1D() = default;
    virtual double theta(double t) const = 0;
    virtual double dtheta(double t) const = 0;
    // upper bound for |theta''| on [u, v]
    virtual double d2bound(double u, double v) const = 0;
};

// theta(t) = 2 pi [lambda p(t) + rho t], p a dim-1 trigonometric polynomial
class TrigPhase final : public Phase1D {
public:
    TrigPhase(double lambda, double rho, TrigPoly p);
    double theta(double t) const override;
    double dtheta(double t) const override;
    double d2bound(double, double) const override { return d2_; }

private:
    double lambda_, rho_;
    TrigPoly p_, dp_;
    double d2_;
};

// theta(t) = sum_k c[k] t^k
class PolyPhase final : public Phase1D {
public:
    explicit PolyPhase(std::vector<double> c);
    double theta(double t) const override;
    double dtheta(double t) const override;
    double d2bound(double u, double v) const override;

private:
    std::vector<double> c_;
};

// t -> psi(x + t, y) (axis 0) or psi(x, y + t) (axis 1) as a dim-1 polynomial
TrigPoly section(const TrigPoly& psi, double x, double y, int axis);

// p.v. int_{a < |t| < b} e^{i theta(t)} dt / t with 0 <= a < b <= 1/2.
cplx pv_osc_1d(const Phase1D& phase, double a, double b, double tol = 1e-9);

struct SWResult {
    double max = 0.0;
    std::vector<double> argmax_coeffs;  // c_1..c_d
    double argmax_a = 0.0;
    double argmax_b = 0.0;
    std::int64_t trials = 0;
};

// Max of |pv int_{a<|t|<b} e^{i P(t)} dt/t| over random real polynomials of degree d.
SWResult sw_sample(int degree, std::int64_t trials, std::uint64_t seed, int jobs = 1);

// Uniform double in [0, 1) from 53 high bits; portable across standard libraries.
double unit_double(std::uint64_t r);

} // namespace uconv
