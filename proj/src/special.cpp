#include "uconv/oscint.hpp"

#include "uconv/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace uconv {

namespace {

constexpr double kPi = std::numbers::pi;

GaussRule make_rule(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return g;
}

// int_X^inf ln(u) sin(u) / u du, three integration-by-parts terms
double log_sine_tail(double x) {
    double l = std::log(x);
    double h0 = l / x;
    double h1 = (1.0 - l) / (x * x);
    double h2 = (2.0 * l - 3.0) / (x * x * x);
    return h0 * std::cos(x) - h1 * std::sin(x) - h2 * std::cos(x);
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(make_rule(n));
    return *slot;
}

double dirichlet(std::int64_t N, double t) {
    if (N < 0) throw RangeError("dirichlet needs N >= 0");
    double r = t - std::nearbyint(t);
    if (r == 0.0) return 2.0 * static_cast<double>(N) + 1.0;
    // reduce (N + 1/2) r modulo 1 before scaling by 2 pi
    double arg = (static_cast<double>(N) + 0.5) * r;
    arg -= std::nearbyint(arg);
    return std::sin(2.0 * kPi * arg) / std::sin(kPi * r);
}

double sine_integral(double x) {
    if (x < 0) return -sine_integral(-x);
    if (x == 0.0) return 0.0;
    if (x < 4.0) {
        double x2 = x * x, term = x, sum = x;
        for (int k = 1; k < 60; ++k) {
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            double add = term / (2.0 * k + 1.0);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    // continued fraction for E1(i x) (modified Lentz)
    const double tiny = 1e-300;
    std::complex<double> b(1.0, x), c(1.0 / tiny, 0.0), d = 1.0 / b, h = d;
    for (int i = 2; i < 1000; ++i) {
        double a = -static_cast<double>(i - 1) * (i - 1);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        std::complex<double> del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
    }
    h *= std::complex<double>(std::cos(x), -std::sin(x));
    return h.imag() + 0.5 * kPi;
}

double fefferman_sine(double lambda) {
    if (!(lambda > 0.0)) throw RangeError("fefferman_sine needs lambda > 0");
    if (lambda > 1e8) throw RangeError("fefferman_sine needs lambda <= 1e8");
    const double X = lambda / 4.0;
    const double U = 2000.0;
    auto f = [](double u) { return u == 0.0 ? 1.0 : sine_integral(u) / u; };
    auto head = [&](double upto) {
        int panels = std::max(1, static_cast<int>(std::ceil(upto)));
        return integrate_gl(f, 0.0, upto, 20, panels);
    };
    if (X <= U) return head(X);
    // int_U^X Si(u)/u du = [Si ln]_U^X - int_U^X ln(u) sin(u)/u du
    double by_parts = sine_integral(X) * std::log(X) - sine_integral(U) * std::log(U);
    double osc = log_sine_tail(U) - log_sine_tail(X);
    return head(U) + by_parts - osc;
}

} // namespace uconv
