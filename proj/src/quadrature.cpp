#include "uconv/oscint.hpp"

#include "uconv/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace uconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxDepth = 64;
// total phase change below which plain Gauss-Legendre is used
constexpr double kSmallPhase = 24.0;

using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

struct Cheb {
    std::vector<double> x;
    Eigen::MatrixXd D;
};

Cheb make_cheb(int n) {
    Cheb c;
    const int N = n - 1;
    c.x.resize(n);
    for (int j = 0; j < n; ++j) c.x[j] = std::cos(std::numbers::pi * j / N);
    c.D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double ci = (i == 0 || i == N) ? 2.0 : 1.0;
        double rowsum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double cj = (j == 0 || j == N) ? 2.0 : 1.0;
            double v = (ci / cj) * (((i + j) % 2) ? -1.0 : 1.0) / (c.x[i] - c.x[j]);
            c.D(i, j) = v;
            rowsum += v;
        }
        c.D(i, i) = -rowsum;
    }
    return c;
}

const Cheb& cheb(int n) {
    static const Cheb c16 = make_cheb(16);
    static const Cheb c24 = make_cheb(24);
    return n == 16 ? c16 : c24;
}

// int_u^v e^{i theta(t)} / t dt by Levin collocation with n nodes
cplx levin(const Phase1D& ph, double u, double v, int n) {
    const Cheb& c = cheb(n);
    double mid = 0.5 * (u + v), half = 0.5 * (v - u);
    CMat A(n, n);
    CVec rhs(n);
    for (int i = 0; i < n; ++i) {
        double t = mid + half * c.x[i];
        for (int j = 0; j < n; ++j) A(i, j) = c.D(i, j) / half;
        A(i, i) += cplx(0.0, ph.dtheta(t));
        rhs(i) = 1.0 / t;
    }
    CVec p = A.partialPivLu().solve(rhs);
    // x_0 = 1 maps to v, x_{n-1} = -1 maps to u
    return p(0) * std::polar(1.0, ph.theta(v)) - p(n - 1) * std::polar(1.0, ph.theta(u));
}

cplx gl_piece(const Phase1D& ph, double u, double v) {
    return integrate_gl([&](double t) { return std::polar(1.0, ph.theta(t)) / t; }, u, v, 40);
}

cplx adaptive(const Phase1D& ph, double u, double v, double tol, int depth) {
    double w = v - u, m = 0.5 * (u + v);
    double d1 = std::abs(ph.dtheta(m));
    double d2 = ph.d2bound(u, v) * 0.5 * w;
    double maxd = d1 + d2, mind = d1 - d2;
    if (maxd * w <= kSmallPhase) return gl_piece(ph, u, v);
    if (mind > 0.0 && mind * w >= 8.0) {
        cplx a = levin(ph, u, v, 16);
        cplx b = levin(ph, u, v, 24);
        if (std::abs(a - b) <= tol) return b;
    }
    if (depth >= kMaxDepth)
        throw QuadratureFailed("pv_osc_1d: recursion cap reached on [" + std::to_string(u) + ", " +
                                   std::to_string(v) + "]",
                               w * maxd);
    return adaptive(ph, u, m, 0.5 * tol, depth + 1) + adaptive(ph, m, v, 0.5 * tol, depth + 1);
}

} // namespace

TrigPhase::TrigPhase(double lambda, double rho, TrigPoly p)
    : lambda_(lambda), rho_(rho), p_(std::move(p)) {
    if (p_.dim() != 1) throw DimMismatch("TrigPhase expects a dim-1 section");
    dp_ = derive(p_, 1, 0);
    d2_ = kTwoPi * std::abs(lambda_) * derive(p_, 2, 0).coeff_sum();
}

double TrigPhase::theta(double t) const { return kTwoPi * (lambda_ * eval(p_, t) + rho_ * t); }

double TrigPhase::dtheta(double t) const { return kTwoPi * (lambda_ * eval(dp_, t) + rho_); }

PolyPhase::PolyPhase(std::vector<double> c) : c_(std::move(c)) {}

double PolyPhase::theta(double t) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
}

double PolyPhase::dtheta(double t) const {
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 1;) acc = acc * t + static_cast<double>(k) * c_[k];
    return acc;
}

double PolyPhase::d2bound(double u, double v) const {
    double r = std::max(std::abs(u), std::abs(v)), acc = 0.0;
    for (std::size_t k = 2; k < c_.size(); ++k)
        acc += static_cast<double>(k * (k - 1)) * std::abs(c_[k]) * std::pow(r, double(k - 2));
    return acc;
}

TrigPoly section(const TrigPoly& psi, double x, double y, int axis) {
    if (psi.dim() != 2) throw DimMismatch("section expects a dim-2 polynomial");
    TrigPoly out(1);
    for (const auto& [m, v] : psi.terms()) {
        // a cos(2pi k t + P) + b sin(2pi k t + P), P = 2pi m.(x, y)
        std::int64_t k = m[axis];
        double c0 = static_cast<double>(m[0]) * x, c1 = static_cast<double>(m[1]) * y;
        double ph = kTwoPi * ((c0 - std::nearbyint(c0)) + (c1 - std::nearbyint(c1)));
        double cc = std::cos(ph), ss = std::sin(ph);
        // cos(A + P) = cos A cos P - sin A sin P; sin(A + P) = sin A cos P + cos A sin P
        out.add(k, v.a * cc + v.b * ss, -v.a * ss + v.b * cc);
    }
    return out;
}

cplx pv_osc_1d(const Phase1D& ph, double a, double b, double tol) {
    if (!(a >= 0.0 && a < b && b <= 0.5)) throw RangeError("pv_osc_1d needs 0 <= a < b <= 1/2");
    cplx acc = 0.0;
    double up = b;
    int shells = 0;
    while (up > a) {
        if (a == 0.0) {
            double spread = up * (std::abs(ph.dtheta(0.0)) + up * ph.d2bound(-up, up));
            if (spread <= kSmallPhase) {
                // odd kernel: fold the symmetric piece into an integrand regular at 0
                auto f = [&](double t) {
                    if (t == 0.0) return cplx(0.0, 2.0 * ph.dtheta(0.0)) * std::polar(1.0, ph.theta(0.0));
                    return (std::polar(1.0, ph.theta(t)) - std::polar(1.0, ph.theta(-t))) / t;
                };
                acc += integrate_gl(f, 0.0, up, 40);
                break;
            }
        }
        double lo = std::max(a, 0.5 * up);
        double w = up - lo, m = 0.5 * (lo + up);
        double reach = w * (std::max(std::abs(ph.dtheta(m)), std::abs(ph.dtheta(-m))) +
                            0.5 * w * std::max(ph.d2bound(lo, up), ph.d2bound(-up, -lo)));
        if (reach <= kSmallPhase) {
            // pair the shells before integrating so even integrands cancel exactly
            acc += integrate_gl(
                [&](double t) { return (std::polar(1.0, ph.theta(t)) - std::polar(1.0, ph.theta(-t))) / t; }, lo,
                up, 40);
        } else {
            acc += adaptive(ph, lo, up, tol / 32.0, 0) + adaptive(ph, -up, -lo, tol / 32.0, 0);
        }
        up = lo;
        if (++shells > 2000) throw QuadratureFailed("pv_osc_1d: too many shells", up);
    }
    return acc;
}

double unit_double(std::uint64_t r) { return static_cast<double>(r >> 11) * 0x1.0p-53; }

SWResult sw_sample(int degree, std::int64_t trials, std::uint64_t seed, int jobs) {
    if (degree < 0 || degree > 5) throw RangeError("sw_sample needs 0 <= degree <= 5");
    if (trials < 1 || trials > 1000000) throw RangeError("sw_sample needs 1 <= trials <= 1e6");
    struct Draw {
        std::vector<double> c;
        double a, b;
    };
    std::mt19937_64 rng(seed);
    std::vector<Draw> draws(static_cast<std::size_t>(trials));
    for (auto& d : draws) {
        d.c.assign(static_cast<std::size_t>(degree) + 1, 0.0);
        for (int k = 1; k <= degree; ++k) {
            double mag = std::pow(10.0, -3.0 + 9.0 * unit_double(rng()));
            double sgn = (rng() >> 63) ? -1.0 : 1.0;
            d.c[k] = sgn * mag;
        }
        double x = 0.5 * unit_double(rng()), y = 0.5 * unit_double(rng());
        if (x > y) std::swap(x, y);
        if (x == y) y = std::min(0.5, x + 1e-12);
        d.a = x;
        d.b = y;
    }
    std::vector<double> vals(draws.size(), 0.0);
    jobs = std::max(1, jobs);
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&](int tid) {
        try {
            for (std::size_t i = tid; i < draws.size(); i += jobs) {
                PolyPhase ph(draws[i].c);
                vals[i] = std::abs(pv_osc_1d(ph, draws[i].a, draws[i].b));
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(work, t);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    SWResult res;
    res.trials = trials;
    std::size_t best = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (vals[i] > vals[best]) best = i;
    res.max = vals[best];
    res.argmax_coeffs.assign(draws[best].c.begin() + 1, draws[best].c.end());
    res.argmax_a = draws[best].a;
    res.argmax_b = draws[best].b;
    return res;
}

} // namespace uconv
