#pragma once

#include "uconv/oscint.hpp"
#include "uconv/trigpoly.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace uconv {

// g(s, t) = exp(2 pi i [phase(s, t) + ks s + kt t]); phase already carries the multiplier n.
struct CharacterSpec {
    TrigPoly phase{2};
    std::int64_t ks = 0;
    std::int64_t kt = 0;
};

// d = 1: phase n phi, shifts n L.  d > 1: phase nvec . phi, shifts nvec . L.
CharacterSpec make_character_spec(const PhaseFamily& f, std::int64_t n);
CharacterSpec make_character_spec(const PhaseFamily& f, const std::vector<std::int64_t>& nvec);

// Largest local frequency |d phase / d axis| in cycles (coefficient bound).
double bandwidth(const TrigPoly& phase, int axis);

inline constexpr int kMaxGrid = 1 << 16;
inline constexpr double kAliasTol = 1e-8;

// Power-of-two grid size along an axis: starts at 8 (n maxfreq + 16) and doubles
// until the predicted spectrum edge sits inside 0.9 of the Nyquist band.
int choose_grid(const TrigPoly& phase, int axis, std::int64_t n_maxfreq_hint);

// Shared table-based exp(2 pi i x) for x reduced mod 1.
cplx cis_turns(double x);

struct CharacterField {
    CharacterSpec spec;
    int Gs = 0, Gt = 0;
    std::vector<cplx> samples;  // row-major in s: samples[i * Gt + j] = g_periodic(i/Gs, j/Gt)
    std::vector<cplx> coeffs;   // centred: coeffs[(k + Gs/2) * Gt + (l + Gt/2)] = c_periodic(k, l)
    double parseval = 0.0;      // sum |c|^2
    double tail_mass = 0.0;     // l2 norm of c over the outer 10% annulus
    double max_unimodular_dev = 0.0;

    cplx coeff(std::int64_t k, std::int64_t l) const;  // coefficient of the full character
};

// G = 0 picks the size automatically (doubling up to 2^12 in memory).
CharacterField build_character(const CharacterSpec& spec, int Gs, int Gt);
CharacterField build_character(const PhaseFamily& f, std::int64_t n, int G = 0);

struct PartialSumGrid {
    std::int64_t M = 0, N = 0;
    int Gs = 0, Gt = 0;
    std::vector<double> values;  // |S_{M,N}| at (i/Gs, j/Gt), row-major in s
    double sup = 0.0;
    double argx = 0.0, argy = 0.0;
};

PartialSumGrid partial_sum_sup(const CharacterField& c, std::int64_t M, std::int64_t N);
cplx partial_sum_at(const CharacterField& c, std::int64_t M, std::int64_t N, double x, double y);

// (M*, N*) = round |n (grad psi(x, y) + omega . L)|; d = 1 uses omega = +1.
std::pair<std::int64_t, std::int64_t> tune_MN(const PhaseFamily& f, std::int64_t n, double x,
                                              double y, const std::vector<double>& omega = {});

} // namespace uconv
