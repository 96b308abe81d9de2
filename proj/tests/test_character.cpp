#include "oracles.hpp"

#include "uconv/character.hpp"
#include "uconv/errors.hpp"
#include "uconv/stream_sums.hpp"

#include <doctest.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <numbers>
#include <random>

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
TrigPoly sq_phase() { return TrigPoly::cos_term({1, 0}) * (TrigPoly::constant(-1.0) + TrigPoly::sin_term({0, 1})); }

} // namespace

TEST_CASE("trivial characters") {
    CharacterField zero = build_character(family(product()), 0, 64);
    CHECK(std::abs(zero.coeff(0, 0) - 1.0) <= 1e-14);
    CHECK(std::abs(zero.coeff(1, 0)) <= 1e-14);

    CharacterField pure = build_character(family(TrigPoly(2), 1, 0), 5, 64);
    CHECK(std::abs(pure.coeff(5, 0) - 1.0) <= 1e-14);
    CHECK(std::abs(pure.coeff(0, 0)) <= 1e-14);
    CHECK(std::abs(pure.coeff(4, 0)) <= 1e-14);
}

TEST_CASE("bessel coefficients of sin(2 pi s)") {
    // e^{2 pi i sin 2 pi s} = sum_k J_k(2 pi) e^{2 pi i k s}
    CharacterField c = build_character(family(TrigPoly::sin_term({1, 0})), 1, 64);
    TrigPoly s1(1);
    s1.add(1, 0.0, 1.0);
    for (int k = -12; k <= 12; ++k) {
        cplx ref = oracle::coefficient_1d(s1, k);
        CHECK(std::abs(c.coeff(k, 0) - ref) <= 1e-8);
        CHECK(std::abs(c.coeff(k, 0).real() - gsl_sf_bessel_Jn(k, 2 * kPi)) <= 1e-8);
    }
}

TEST_CASE("field invariants") {
    for (auto f : {family(product(), 4, 4), family(sq_phase(), 8, 14), family(TrigPoly::sin_term({2, 3}, 0.25))}) {
        for (std::int64_t n : {1, 8, 32}) {
            CharacterField c = build_character(f, n);
            CHECK(c.max_unimodular_dev <= 1e-12);
            CHECK(std::abs(c.parseval - 1.0) <= 1e-8);
            CHECK(c.tail_mass <= kAliasTol);
        }
    }
    CHECK_THROWS_AS(build_character(family(product()), 64, 64), AliasGuardFailed);
    CHECK_THROWS_AS(build_character(make_character_spec(family(product()), 1), 48, 64), RangeError);
}

TEST_CASE("partial sums: completeness and the zero truncation") {
    CharacterField c = build_character(family(product(), 1, 2), 3, 128);
    PartialSumGrid full = partial_sum_sup(c, 60, 60);
    CHECK(std::abs(full.sup - 1.0) <= 1e-6);
    double worst = 0.0;
    for (double v : full.values) worst = std::max(worst, std::abs(v - 1.0));
    CHECK(worst <= 1e-6);
    PartialSumGrid zero = partial_sum_sup(c, 0, 0);
    CHECK(zero.sup == doctest::Approx(std::abs(c.coeff(0, 0))).epsilon(1e-12));
    CHECK_THROWS_AS(partial_sum_sup(c, -1, 0), RangeError);
    CHECK_THROWS_AS(partial_sum_at(c, 0, -2, 0.0, 0.0), RangeError);
}

TEST_CASE("grid and point partial sums agree") {
    CharacterField c = build_character(family(product(), 4, 4), 6, 256);
    for (auto [M, N] : {std::pair<std::int64_t, std::int64_t>{10, 30}, {24, 24}, {40, 3}}) {
        PartialSumGrid g = partial_sum_sup(c, M, N);
        for (int i : {0, 17, 200})
            for (int j : {5, 128})
                CHECK(std::abs(std::abs(partial_sum_at(c, M, N, i / 256.0, j / 256.0)) -
                               g.values[static_cast<std::size_t>(i) * 256 + j]) <= 1e-12);
    }
}

TEST_CASE("coefficient truncation matches direct Dirichlet quadrature") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> mn(0, 64);
    PhaseFamily f = family(product(), 4, 4);
    CharacterField c = build_character(f, 3, 1024);
    for (int k = 0; k < 4; ++k) {
        double x = u(rng), y = u(rng);
        std::int64_t M = mn(rng), N = mn(rng);
        cplx a = partial_sum_at(c, M, N, x, y);
        cplx b = oracle::dirichlet_partial_sum(c.spec, M, N, x, y, 512);
        CHECK(std::abs(a - b) <= 1e-4 * std::abs(b));
    }
}

TEST_CASE("tuned truncation orders") {
    CHECK(tune_MN(family(TrigPoly(2), 3, 2), 10, 0.3, 0.7) == std::pair<std::int64_t, std::int64_t>{30, 20});
    CHECK(tune_MN(family(product(), 3, 2), 0, 0.3, 0.7) == std::pair<std::int64_t, std::int64_t>{0, 0});
    for (std::int64_t n : {10, 100, 1000}) {
        auto [M, N] = tune_MN(family(sq_phase(), 1, 1), n, 0.125, 0.0);
        CHECK(M == N);
        CHECK(M == std::llround(n * (kPi * std::sqrt(2.0) + 1.0)));
    }
}

TEST_CASE("streamed partial sums match the in-memory field") {
    PhaseFamily f = family(product(), 4, 4);
    CharacterSpec spec = make_character_spec(f, 5);
    CharacterField c = build_character(spec, 128, 128);
    StreamPlan plan;
    plan.P = 8;
    plan.shared = {{3, 7}, {20, 20}, {64, 1}};
    plan.points = {{0.0, 0.25}, {0.3141, 0.2718}};
    plan.queries = {{0, 20, 20}, {1, 33, 12}, {1, 0, 0}};
    plan.blocks = {{1, {5, 25, 45}, {0, 19}}};
    StreamResult r1 = stream_partial_sums(spec, 128, 128, plan, 1);
    StreamResult r2 = stream_partial_sums(spec, 128, 128, plan, 2);
    CHECK(r1.shared_values == r2.shared_values);
    CHECK(r1.query_values == r2.query_values);
    CHECK(r1.block_values == r2.block_values);
    CHECK(std::abs(r1.parseval - c.parseval) <= 1e-10);
    for (int ix = 0; ix < 8; ++ix)
        for (int iy = 0; iy < 8; ++iy)
            for (std::size_t p = 0; p < plan.shared.size(); ++p) {
                double ref = std::abs(partial_sum_at(c, plan.shared[p].first, plan.shared[p].second, ix / 8.0, iy / 8.0));
                CHECK(std::abs(r1.shared_values[(ix * 8 + iy) * plan.shared.size() + p] - ref) <= 1e-11);
            }
    for (std::size_t q = 0; q < plan.queries.size(); ++q) {
        const auto& pt = plan.points[plan.queries[q].point];
        double ref = std::abs(partial_sum_at(c, plan.queries[q].M, plan.queries[q].N, pt.x, pt.y));
        CHECK(std::abs(r1.query_values[q] - ref) <= 1e-11);
    }
    const auto& b = plan.blocks[0];
    for (std::size_t i = 0; i < b.Ms.size(); ++i)
        for (std::size_t k = 0; k < b.Ns.size(); ++k) {
            const auto& pt = plan.points[b.point];
            double ref = std::abs(partial_sum_at(c, b.Ms[i], b.Ns[k], pt.x, pt.y));
            CHECK(std::abs(r1.block_values[0][i * b.Ns.size() + k] - ref) <= 1e-11);
        }
}
