#include "uconv/errors.hpp"
#include "uconv/norms.hpp"

#include <doctest.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace uconv;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseFamily family(TrigPoly p, std::int64_t L1 = 0, std::int64_t L2 = 0) {
    PhaseFamily f;
    f.components = {std::move(p)};
    f.lattice = {{L1, L2}};
    return f;
}

TrigPoly product() { return TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1}); }
TrigPoly split() { return TrigPoly::sin_term({1, 0}) + TrigPoly::cos_term({0, 1}, 0.5); }
TrigPoly sq_phase() { return TrigPoly::cos_term({1, 0}) * (TrigPoly::constant(-1.0) + TrigPoly::sin_term({0, 1})); }

// sup over M and x of |sum_{|k| <= M} c_k e^{2 pi i k x}| for c_k = i^{k q} J_k(2 pi a n),
// i.e. the 1-D function e^{2 pi i n a sin(2 pi x)} (q = 0) or e^{2 pi i n a cos(2 pi x)} (q = 1).
double sup_1d_bessel(double a, std::int64_t n, int q) {
    const double z = 2 * kPi * a * static_cast<double>(n);
    const int K = static_cast<int>(z + 12 * std::cbrt(z) + 30);
    std::vector<std::complex<double>> c(2 * K + 1);
    for (int k = -K; k <= K; ++k) {
        std::complex<double> ik = std::pow(std::complex<double>(0, 1), (q * ((k % 4) + 4)) % 4);
        c[k + K] = ik * gsl_sf_bessel_Jn(k, z);
    }
    const int X = 16384;
    double best = 0.0;
    for (int ix = 0; ix < X; ++ix) {
        double x = static_cast<double>(ix) / X;
        std::complex<double> s = c[K];
        best = std::max(best, std::abs(s));
        for (int k = 1; k <= K; ++k) {
            s += c[K + k] * std::polar(1.0, 2 * kPi * k * x) + c[K - k] * std::polar(1.0, -2 * kPi * k * x);
            best = std::max(best, std::abs(s));
        }
    }
    return best;
}

} // namespace

TEST_CASE("pure characters have norm one") {
    for (auto L : {std::pair<std::int64_t, std::int64_t>{0, 0}, {3, 2}, {-5, 7}})
        for (std::int64_t n : {1, 10, 100}) {
            PhaseFamily f = family(TrigPoly(2), L.first, L.second);
            CHECK(urect_estimate(f, n).norm == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(usq_estimate(f, n).norm == doctest::Approx(1.0).epsilon(1e-6));
        }
    NormCurve c = growth_curve(family(TrigPoly(2), 3, 2), {8, 16, 32, 64}, NormMode::Rect);
    CHECK(std::abs(c.fit.slope) <= 1e-3);
    CHECK(c.fit_begin == 2);
}

TEST_CASE("estimates are at least one") {
    for (auto f : {family(product(), 4, 4), family(split()), family(sq_phase(), 8, 14)})
        for (std::int64_t n : {4, 16}) {
            CHECK(urect_estimate(f, n).norm >= 1.0 - 1e-6);
            CHECK(usq_estimate(f, n).norm >= 1.0 - 1e-6);
        }
}

TEST_CASE("square sums never exceed rectangular sums") {
    for (auto f : {family(product(), 4, 4), family(product()), family(sq_phase(), 8, 14), family(split())})
        for (std::int64_t n : {8, 32}) {
            NormEstimate r = urect_estimate(f, n), s = usq_estimate(f, n);
            CHECK(s.norm <= r.norm + 1e-9);
            CHECK(s.M == s.N);
        }
}

TEST_CASE("larger candidate sets never lower the estimate") {
    PhaseFamily f = family(product(), 4, 4);
    NormStrategy small, big;
    small.Mmax = 64;
    big.Mmax = 512;
    CHECK(urect_estimate(f, 16, small).norm <= urect_estimate(f, 16, big).norm + 1e-12);
    NormStrategy coarse, fine;
    coarse.P = 8;
    fine.P = 32;
    CHECK(urect_estimate(f, 16, coarse).norm <= urect_estimate(f, 16, fine).norm + 1e-12);
    NormEstimate e = urect_estimate(f, 16, small);
    CHECK(e.M <= 64);
    CHECK(e.N <= 64);
}

TEST_CASE("split phases factorise into one-dimensional norms") {
    for (std::int64_t n : {16, 32}) {
        double ref = sup_1d_bessel(1.0, n, 0) * sup_1d_bessel(0.5, n, 1);
        double est = urect_estimate(family(split()), n).norm;
        INFO("n=" << n << " est=" << est << " ref=" << ref);
        CHECK(std::abs(est - ref) <= 0.02 * ref);
    }
}

TEST_CASE("tuning matters for the product family") {
    PhaseFamily f = family(product(), 4, 4);
    NormStrategy dyadic_only;
    dyadic_only.tuned = false;
    dyadic_only.critical = false;
    dyadic_only.use_witnesses = false;
    NormEstimate full = urect_estimate(f, 256), dy = urect_estimate(f, 256, dyadic_only);
    CHECK(dy.norm <= full.norm + 1e-12);
    CHECK(dy.norm >= 0.8 * full.norm);
}

TEST_CASE("product growth between n = 64 and n = 1024") {
    // slope of the norm in ln n is 1/(2 pi) at leading order; half of it is the acceptance slack
    PhaseFamily f = family(product(), 4, 4);
    double a = urect_estimate(f, 64).norm, b = urect_estimate(f, 1024).norm;
    CHECK(b - a >= 0.5 * std::log(16.0) / (2 * kPi));
}

TEST_CASE("pointwise square sums at (1/8, 0)") {
    // equal tuned components; the Taylor data there give n0 = 2, m0 = 3
    PhaseFamily f = family(sq_phase(), 1, 1);
    std::vector<double> x, y;
    for (std::int64_t n : {256, 512, 1024, 2048}) {
        PointValue v = tuned_point_value(f, n, 0.125, 0.0, NormMode::Sq);
        CHECK(v.M == v.N);
        x.push_back(std::log(static_cast<double>(n)));
        y.push_back(v.value);
    }
    double predicted = (1.0 / (2 * kPi)) * (1.0 - 1.0 / 2 - 1.0 / 3);
    LinearFit fit = fit_line(x, y);
    INFO("slope " << fit.slope << " predicted " << predicted);
    CHECK(std::abs(fit.slope - predicted) <= 0.5 * predicted);
}

TEST_CASE("line fits") {
    LinearFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    LinearFit flat = fit_line({0, 1, 2}, {4, 4, 4});
    CHECK(flat.slope == 0.0);
    CHECK(flat.r2 == 1.0);
}

TEST_CASE("offset sets") {
    auto v = offset_set(2, 100.0, 1.5);
    CHECK(std::is_sorted(v.begin(), v.end()));
    for (int o = -2; o <= 2; ++o) CHECK(std::find(v.begin(), v.end(), o) != v.end());
    for (auto o : v) {
        CHECK(std::find(v.begin(), v.end(), -o) != v.end());
        CHECK(std::llabs(o) <= 100);
    }
    CHECK_THROWS_AS(offset_set(-1, 10.0, 2.0), RangeError);
    CHECK_THROWS_AS(offset_set(1, 10.0, 1.0), RangeError);
}

TEST_CASE("critical points satisfy their defining equations") {
    CharacterSpec spec = make_character_spec(family(product(), 4, 4), 16);
    auto pts = critical_points(spec, 16);
    CHECK(!pts.empty());
    TrigPoly ps = derive(spec.phase, 1, 0), pt = derive(spec.phase, 0, 1);
    TrigPoly pss = derive(spec.phase, 2, 0), ptt = derive(spec.phase, 0, 2);
    for (const auto& p : pts) {
        double a = std::min(std::abs(eval(ps, p.x, p.y) + spec.ks), std::abs(eval(pss, p.x, p.y)));
        double b = std::min(std::abs(eval(pt, p.x, p.y) + spec.kt), std::abs(eval(ptt, p.x, p.y)));
        CHECK(a <= 1e-6 * (1.0 + ps.coeff_sum()));
        CHECK(b <= 1e-6 * (1.0 + pt.coeff_sum()));
    }
}

TEST_CASE("witness points of the product family") {
    auto w = witness_points(family(product()), {1.0}, 256, 64);
    bool found = false;
    for (const auto& p : w) found = found || (std::abs(p.x) < 1e-6 && std::abs(p.y - 0.25) < 1e-6);
    CHECK(found);
}

TEST_CASE("lattice directions") {
    auto v = lattice_direction({0.6, 0.8});
    REQUIRE(v.size() == 2);
    CHECK(v[0] * 4 == v[1] * 3);
    auto w = lattice_direction({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}, 50);
    CHECK(w[0] == w[1]);
    auto u = lattice_direction({std::cos(1.0), std::sin(1.0)}, 1000);
    double ang = std::atan2(static_cast<double>(u[1]), static_cast<double>(u[0]));
    CHECK(std::abs(ang - 1.0) <= 1e-5);
}

TEST_CASE("two-component families sweep along a lattice direction") {
    PhaseFamily f;
    f.components = {TrigPoly::sin_term({1, 0}), TrigPoly::cos_term({0, 1})};
    f.lattice = {{0, 0}, {0, 0}};
    NormCurve c = growth_curve(f, {2, 4, 8, 16}, NormMode::Rect, {}, {0.6, 0.8});
    REQUIRE(c.points.size() == 4);
    for (const auto& p : c.points) CHECK(p.est.norm >= 1.0 - 1e-6);
    CHECK_THROWS(growth_curve(f, {2, 4, 8}, NormMode::Rect, {}, {0.6, 0.8}));
}

TEST_CASE("norm modes parse") {
    CHECK(parse_norm_mode("rect") == NormMode::Rect);
    CHECK(parse_norm_mode("sq") == NormMode::Sq);
    CHECK_THROWS_AS(parse_norm_mode("sph"), ConfigError);
}
