#include "uconv/errors.hpp"
#include "uconv/fhcheck.hpp"

#include <doctest.h>

#include <cmath>
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

double torus_dist(double a, double b) {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

TrigPoly s_factor(int p, int kind) { return kind ? TrigPoly::sin_term({p, 0}) : TrigPoly::cos_term({p, 0}); }
TrigPoly t_factor(int q, int kind) { return kind ? TrigPoly::sin_term({0, q}) : TrigPoly::cos_term({0, q}); }

} // namespace

TEST_CASE("product family is violated at (0, 1/4)") {
    PhaseFamily f = family(TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1}));
    FHReport r = witness_search(f, 512, 1);
    REQUIRE(r.verdict == Verdict::Violated);
    double best = 1.0, psi = 0.0;
    for (const auto& w : r.witnesses) {
        double d = std::hypot(torus_dist(w.x, 0.0), torus_dist(w.y, 0.25));
        if (d < best) best = d, psi = w.psi_st;
    }
    CHECK(best <= 1e-6);
    CHECK(psi == doctest::Approx(-4 * kPi * kPi).epsilon(1e-8));
    CHECK(r.omega_skipped == 1);
}

TEST_CASE("reported witnesses are sound") {
    PhaseFamily f = family(TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 2}) + TrigPoly::cos_term({1, 1}, 0.3));
    FHReport r = witness_search(f, 256, 1);
    REQUIRE(r.verdict == Verdict::Violated);
    const TrigPoly& psi = f.components[0];
    for (const auto& w : r.witnesses) {
        CHECK(is_witness(psi, w.x, w.y));
        TrigPoly sec = derive(psi, w.axis == "tt" ? 0 : 2, w.axis == "tt" ? 2 : 0);
        CHECK(std::abs(eval(sec, w.x, w.y)) <= r.tau_zero_rel * sec.coeff_sum());
        CHECK(std::abs(eval(derive(psi, 1, 1), w.x, w.y)) >= r.tau_st_rel * derive(psi, 1, 1).coeff_sum());
    }
}

TEST_CASE("split and composite families have no witness") {
    CHECK(witness_search(family(TrigPoly::sin_term({1, 0}) + TrigPoly::cos_term({0, 1}, 0.5)), 512, 1).verdict ==
          Verdict::NoWitnessFound);
    CHECK(witness_search(family(TrigPoly::sin_term({2, 3})), 512, 1).verdict == Verdict::NoWitnessFound);
    CHECK(witness_search(family(TrigPoly::sin_term({2, 3}, 0.25) + TrigPoly::cos_term({4, 6}, 0.1)), 512, 1)
              .verdict == Verdict::NoWitnessFound);
    CHECK(witness_search(family(TrigPoly(2), 3, 2), 128, 1).verdict == Verdict::NoWitnessFound);
}

TEST_CASE("products of nonconstant factors are always violated") {
    for (int p = 1; p <= 3; ++p)
        for (int q = 1; q <= 3; ++q)
            for (int ks = 0; ks < 2; ++ks)
                for (int kt = 0; kt < 2; ++kt) {
                    PhaseFamily f = family(s_factor(p, ks) * t_factor(q, kt));
                    INFO("p=" << p << " q=" << q << " kinds " << ks << kt);
                    CHECK(structural_classify(f) == Structure::Product);
                    CHECK(witness_search(f, 256, 1).verdict == Verdict::Violated);
                }
}

TEST_CASE("doubling the grid keeps violations") {
    std::vector<PhaseFamily> corpus = {
        family(TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1})),
        family(TrigPoly::cos_term({1, 0}) * (TrigPoly::constant(-1.0) + TrigPoly::sin_term({0, 1}))),
        family(TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1}) + TrigPoly::cos_term({1, -2}, 0.3)),
    };
    for (const auto& f : corpus)
        for (int g : {64, 128, 256})
            if (witness_search(f, g, 1).verdict == Verdict::Violated)
                CHECK(witness_search(f, 2 * g, 1).verdict == Verdict::Violated);
}

TEST_CASE("structural classification") {
    CHECK(structural_classify(family(TrigPoly::cos_term({1, 0}) + TrigPoly::sin_term({0, 1}))) == Structure::Split);
    CHECK(structural_classify(family(TrigPoly::sin_term({2, 3}))) == Structure::Composite);
    CHECK(structural_classify(family(TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1}))) ==
          Structure::Product);
    CHECK(structural_classify(family((TrigPoly::sin_term({1, 0}) + TrigPoly::constant(2.0)) *
                                     (TrigPoly::cos_term({0, 2}) + TrigPoly::sin_term({0, 1})))) ==
          Structure::Product);
    CHECK(structural_classify(family(TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1}) +
                                     TrigPoly::cos_term({1, -2}, 0.3))) == Structure::Generic);
}

TEST_CASE("directions for d > 1") {
    for (std::size_t d : {2u, 3u, 5u}) {
        auto dirs = sample_directions(d, 32);
        CHECK(dirs.size() >= 1);
        for (const auto& w : dirs) {
            double n = 0.0;
            for (double x : w) n += x * x;
            CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-12);
        }
        CHECK(sample_directions(d, 32) == dirs);
    }
    // two components: the contraction along (0, 1) is the product, so some direction fails
    PhaseFamily f;
    f.components = {TrigPoly::sin_term({1, 0}) + TrigPoly::cos_term({0, 1}),
                    TrigPoly::sin_term({1, 0}) * TrigPoly::cos_term({0, 1})};
    f.lattice = {{0, 0}, {0, 0}};
    CHECK(witness_search(f, 128, 32).verdict == Verdict::Violated);
    CHECK_THROWS_AS(witness_search(f, 32, 4), RangeError);
}

TEST_CASE("exact grid values") {
    TrigPoly p = TrigPoly::cos_term({1, 0});
    auto v = eval_grid(p, 8);
    CHECK(v[0] == 1.0);
    CHECK(v[2 * 8] == doctest::Approx(0.0).scale(1.0));
    CHECK(v[4 * 8 + 3] == -1.0);
}
