#include "uconv/errors.hpp"
#include "uconv/oscint.hpp"

#include <doctest.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_expint.h>

#include <cmath>
#include <numbers>

using namespace uconv;

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^X Si(u)/u du with GSL's Si and adaptive quadrature, split at multiples of pi
double si_over_u_integral(double X) {
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
    gsl_function F;
    F.function = [](double u, void*) { return u == 0.0 ? 1.0 : gsl_sf_Si(u) / u; };
    F.params = nullptr;
    double total = 0.0;
    double a = 0.0;
    while (a < X) {
        double b = std::min(X, a + 64.0);
        double r = 0.0, err = 0.0;
        gsl_integration_qag(&F, a, b, 1e-13, 1e-12, 2000, GSL_INTEG_GAUSS61, ws, &r, &err);
        total += r;
        a = b;
    }
    gsl_integration_workspace_free(ws);
    return total;
}

TrigPoly zero1() { return TrigPoly(1); }

} // namespace

TEST_CASE("dirichlet kernel") {
    CHECK(dirichlet(3, 0.0) == 7.0);
    CHECK(dirichlet(5, 1.0) == 11.0);
    for (double t : {0.1, 0.27, -0.4}) CHECK(dirichlet(0, t) == doctest::Approx(1.0).epsilon(1e-14));
    // closed form sum_{|k| <= N} e^{2 pi i k t}
    for (int N : {1, 4, 17})
        for (double t : {0.013, 0.2, 0.49}) {
            double s = 1.0;
            for (int k = 1; k <= N; ++k) s += 2 * std::cos(2 * kPi * k * t);
            CHECK(dirichlet(N, t) == doctest::Approx(s).epsilon(1e-11));
        }
    double integral = integrate_gl([](double t) { return dirichlet(3, t); }, -0.5, 0.5, 32, 4);
    CHECK(std::abs(integral - 1.0) <= 1e-10);
    CHECK_THROWS_AS(dirichlet(-1, 0.1), RangeError);
}

TEST_CASE("sine integral against GSL") {
    for (double x : {0.0, 1e-6, 0.3, 1.0, 3.9, 4.0, 4.1, 7.5, 20.0, 123.4, 1e4, 3e6})
        CHECK(std::abs(sine_integral(x) - gsl_sf_Si(x)) <= 1e-10);
    CHECK(sine_integral(-2.5) == doctest::Approx(-gsl_sf_Si(2.5)).epsilon(1e-12));
}

TEST_CASE("gauss-legendre rules are exact for polynomials") {
    const GaussRule& g = gauss_legendre(16);
    double sw = 0.0;
    for (double w : g.w) sw += w;
    CHECK(sw == doctest::Approx(2.0).epsilon(1e-14));
    double i = integrate_gl([](double x) { return std::pow(x, 30) - 3 * x * x; }, -1.0, 2.0, 16, 1);
    CHECK(i == doctest::Approx((std::pow(2.0, 31) + 1.0) / 31 - 9.0).epsilon(1e-12));
}

TEST_CASE("fefferman sine integral") {
    // small lambda: lambda / 4
    double l = 1e-3;
    CHECK(fefferman_sine(l) == doctest::Approx(l / 4).epsilon(1e-6));
    for (double lam : {10.0, 1e3, 1e5})
        CHECK(std::abs(fefferman_sine(lam) - si_over_u_integral(lam / 4)) <= 1e-6);
    double d = fefferman_sine(1e6) - fefferman_sine(1e5);
    CHECK(d == doctest::Approx(kPi / 2 * std::log(10.0)).epsilon(0.03));
    double prev = 0.0;
    for (int k = 0; k <= 40; ++k) {
        double v = fefferman_sine(std::pow(10.0, 7.0 * k / 40));
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK_THROWS_AS(fefferman_sine(0.0), RangeError);
    CHECK_THROWS_AS(fefferman_sine(2e8), RangeError);
}

TEST_CASE("fefferman slope over 1e3..1e7") {
    std::vector<double> x, y;
    for (int k = 0; k < 25; ++k) {
        double lam = std::pow(10.0, 3.0 + 4.0 * k / 24);
        x.push_back(std::log(lam));
        y.push_back(fefferman_sine(lam));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    CHECK(sxy / sxx == doctest::Approx(kPi / 2).epsilon(0.02));
}

TEST_CASE("principal value with a linear phase") {
    for (double rho : {0.0, 0.3, 1.0, 2.7, 10.0, 55.5}) {
        TrigPhase ph(0.0, rho, zero1());
        cplx v = pv_osc_1d(ph, 0.0, 0.5);
        CHECK(std::abs(v.real()) <= 1e-9);
        CHECK(std::abs(v.imag() - 2 * gsl_sf_Si(kPi * rho)) <= 1e-6);
        CHECK(std::abs(v) <= kPi + 1e-6 + 2 * (gsl_sf_Si(kPi) - kPi / 2));
        // oddness: rho -> -rho is conjugation
        TrigPhase neg(0.0, -rho, zero1());
        CHECK(std::abs(pv_osc_1d(neg, 0.0, 0.5) - std::conj(v)) <= 1e-10);
    }
    TrigPhase flat(0.0, 0.0, zero1());
    CHECK(pv_osc_1d(flat, 0.1, 0.4) == cplx(0.0, 0.0));
    CHECK_THROWS_AS(pv_osc_1d(flat, 0.3, 0.2), RangeError);
}

TEST_CASE("principal value against direct quadrature of the odd part") {
    // pv int_{a<|t|<b} e^{i theta} dt/t = int_a^b (e^{i theta(t)} - e^{i theta(-t)}) dt / t
    TrigPoly p(1);
    p.add(1, 0.3, 0.8);
    p.add(2, 0.0, -0.4);
    for (double lam : {1.0, 7.0, 40.0}) {
        TrigPhase ph(lam, 1.5, p);
        auto f = [&](double t) {
            return (std::exp(cplx(0, ph.theta(t))) - std::exp(cplx(0, ph.theta(-t)))) / t;
        };
        cplx ref = integrate_gl(f, 0.05, 0.45, 48, 64);
        CHECK(std::abs(pv_osc_1d(ph, 0.05, 0.45) - ref) <= 1e-7);
    }
    PolyPhase poly({0.0, 30.0, -200.0, 900.0});
    auto g = [&](double t) {
        return (std::exp(cplx(0, poly.theta(t))) - std::exp(cplx(0, poly.theta(-t)))) / t;
    };
    cplx ref = integrate_gl(g, 1e-9, 0.5, 48, 256);
    CHECK(std::abs(pv_osc_1d(poly, 0.0, 0.5) - ref) <= 1e-6);
}

TEST_CASE("sections of a dim-2 phase") {
    TrigPoly psi = TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1});
    TrigPoly sx = section(psi, 0.1, 0.3, 0), sy = section(psi, 0.1, 0.3, 1);
    for (double t : {0.0, 0.17, -0.2}) {
        CHECK(eval(sx, t) == doctest::Approx(eval(psi, 0.1 + t, 0.3)).epsilon(1e-12).scale(1.0));
        CHECK(eval(sy, t) == doctest::Approx(eval(psi, 0.1, 0.3 + t)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("stein-wainger sampling") {
    SWResult z = sw_sample(0, 200, 1);
    CHECK(z.max <= 1e-12);
    SWResult one = sw_sample(1, 2000, 3);
    CHECK(one.max <= 2 * gsl_sf_Si(kPi) + 1e-3);
    SWResult a = sw_sample(3, 500, 7), b = sw_sample(3, 500, 7, 3);
    CHECK(a.max == b.max);
    CHECK(a.argmax_coeffs == b.argmax_coeffs);
    CHECK(a.argmax_coeffs.size() == 3);
    // a longer run with the same seed extends the same draws
    SWResult c = sw_sample(3, 1000, 7);
    CHECK(c.max >= a.max);
    CHECK(std::isfinite(c.max));
    CHECK_THROWS_AS(sw_sample(6, 10, 1), RangeError);
    CHECK_THROWS_AS(sw_sample(3, 2000000, 1), RangeError);
}

TEST_CASE("unit_double") {
    CHECK(unit_double(0) == 0.0);
    CHECK(unit_double(~0ULL) < 1.0);
    CHECK(unit_double(1ULL << 63) == 0.5);
}
