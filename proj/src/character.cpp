#include "uconv/character.hpp"

#include "uconv/errors.hpp"
#include "uconv/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kTableBits = 12;
constexpr int kTableSize = 1 << kTableBits;

struct CisTable {
    std::vector<cplx> v;
    CisTable() : v(kTableSize) {
        for (int i = 0; i < kTableSize; ++i) v[i] = std::polar(1.0, kTwoPi * i / kTableSize);
    }
};

int pow2_at_least(double x) {
    int g = 8;
    while (g < x && g < kMaxGrid) g *= 2;
    return g;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

cplx cis_turns(double x) {
    static const CisTable table;
    double r = x - std::floor(x);
    double u = r * kTableSize;
    double iu = std::nearbyint(u);
    double d = kTwoPi * (u - iu) / kTableSize;
    int idx = static_cast<int>(iu) & (kTableSize - 1);
    double d2 = d * d;
    double c = 1.0 - d2 / 2.0 * (1.0 - d2 / 12.0 * (1.0 - d2 / 30.0));
    double s = d * (1.0 - d2 / 6.0 * (1.0 - d2 / 20.0 * (1.0 - d2 / 42.0)));
    return table.v[idx] * cplx(c, s);
}

CharacterSpec make_character_spec(const PhaseFamily& f, std::int64_t n) {
    f.validate();
    if (f.d() != 1) throw DimMismatch("scalar n needs d = 1; pass an integer vector");
    return make_character_spec(f, std::vector<std::int64_t>{n});
}

CharacterSpec make_character_spec(const PhaseFamily& f, const std::vector<std::int64_t>& nvec) {
    f.validate();
    if (nvec.size() != f.d()) throw DimMismatch("frequency vector length differs from d");
    CharacterSpec c;
    for (std::size_t j = 0; j < f.d(); ++j) {
        c.phase = c.phase + f.components[j] * static_cast<double>(nvec[j]);
        c.ks += nvec[j] * f.lattice[j][0];
        c.kt += nvec[j] * f.lattice[j][1];
    }
    return c;
}

double bandwidth(const TrigPoly& phase, int axis) {
    double b = 0.0;
    for (const auto& [m, v] : phase.terms())
        b += std::abs(static_cast<double>(m[axis])) * (std::abs(v.a) + std::abs(v.b));
    return kTwoPi * b;
}

int choose_grid(const TrigPoly& phase, int axis, std::int64_t n_maxfreq_hint) {
    double b = bandwidth(phase, axis);
    double c3 = 0.0;
    for (const auto& [m, v] : phase.terms()) {
        double k = std::abs(static_cast<double>(m[axis]));
        c3 += k * k * k * (std::abs(v.a) + std::abs(v.b));
    }
    c3 *= kTwoPi * kTwoPi * kTwoPi;
    double edge = b + 12.0 * std::cbrt(c3) + 16.0;
    double g0 = 8.0 * (static_cast<double>(n_maxfreq_hint) + 16.0);
    return pow2_at_least(std::max(g0, edge / 0.45));
}

cplx CharacterField::coeff(std::int64_t k, std::int64_t l) const {
    std::int64_t kp = k - spec.ks, lp = l - spec.kt;
    if (kp < -Gs / 2 || kp >= Gs / 2 || lp < -Gt / 2 || lp >= Gt / 2) return 0.0;
    return coeffs[static_cast<std::size_t>(kp + Gs / 2) * Gt + static_cast<std::size_t>(lp + Gt / 2)];
}

CharacterField build_character(const CharacterSpec& spec, int Gs, int Gt) {
    auto pow2 = [](int g) { return g >= 2 && (g & (g - 1)) == 0; };
    if (!pow2(Gs) || !pow2(Gt)) throw RangeError("grid sizes must be powers of two");
    if (static_cast<long long>(Gs) * Gt > (1LL << 26)) throw RangeError("in-memory field too large");
    CharacterField c;
    c.spec = spec;
    c.Gs = Gs;
    c.Gt = Gt;
    const std::size_t total = static_cast<std::size_t>(Gs) * Gt;

    // phase on the grid through exact integer angle indices
    const int Gm = std::max(Gs, Gt);
    std::vector<double> cs(Gm), sn(Gm);
    for (int i = 0; i < Gm; ++i) {
        cs[i] = std::cos(kTwoPi * i / Gm);
        sn[i] = std::sin(kTwoPi * i / Gm);
    }
    std::vector<double> ph(total, 0.0);
    for (const auto& [m, v] : spec.phase.terms()) {
        std::int64_t a = floor_mod(m[0] * (Gm / Gs), Gm), b = floor_mod(m[1] * (Gm / Gt), Gm);
        for (int i = 0; i < Gs; ++i) {
            std::int64_t idx = (a * i) % Gm;
            double* row = &ph[static_cast<std::size_t>(i) * Gt];
            for (int j = 0; j < Gt; ++j) {
                row[j] += v.a * cs[idx] + v.b * sn[idx];
                idx += b;
                if (idx >= Gm) idx -= Gm;
            }
        }
    }
    c.samples.resize(total);
    for (std::size_t q = 0; q < total; ++q) {
        c.samples[q] = cis_turns(ph[q]);
        c.max_unimodular_dev = std::max(c.max_unimodular_dev, std::abs(std::abs(c.samples[q]) - 1.0));
    }

    std::vector<cplx> out(total);
    fft2d_forward(c.samples.data(), out.data(), Gs, Gt);
    c.coeffs.assign(total, 0.0);
    const double norm = 1.0 / static_cast<double>(total);
    double tail2 = 0.0;
    for (int k = -Gs / 2; k < Gs / 2; ++k) {
        for (int l = -Gt / 2; l < Gt / 2; ++l) {
            cplx v = out[static_cast<std::size_t>(floor_mod(k, Gs)) * Gt + floor_mod(l, Gt)] * norm;
            c.coeffs[static_cast<std::size_t>(k + Gs / 2) * Gt + (l + Gt / 2)] = v;
            double a2 = std::norm(v);
            c.parseval += a2;
            if (std::abs(k) >= 0.45 * Gs || std::abs(l) >= 0.45 * Gt) tail2 += a2;
        }
    }
    c.tail_mass = std::sqrt(tail2);
    return c;
}

CharacterField build_character(const PhaseFamily& f, std::int64_t n, int G) {
    CharacterSpec spec = make_character_spec(f, n);
    std::int64_t hint = 0;
    for (const auto& comp : f.components)
        hint = std::max({hint, comp.max_freq(0), comp.max_freq(1)});
    hint *= std::llabs(n);
    const bool automatic = G == 0;
    int Gs = G, Gt = G;
    if (automatic) {
        Gs = choose_grid(spec.phase, 0, hint);
        Gt = choose_grid(spec.phase, 1, hint);
        Gs = Gt = std::max(Gs, Gt);
    }
    for (;;) {
        CharacterField c = build_character(spec, Gs, Gt);
        if (c.tail_mass <= kAliasTol) return c;
        if (!automatic || Gs >= (1 << 12))
            throw AliasGuardFailed("alias guard: tail mass " + std::to_string(c.tail_mass) +
                                       " at G=" + std::to_string(Gs),
                                   c.tail_mass);
        Gs *= 2;
        Gt *= 2;
    }
}

namespace {

std::pair<std::int64_t, std::int64_t> clip_window(std::int64_t M, std::int64_t shift, int G) {
    std::int64_t lo = std::max<std::int64_t>(-M - shift, -G / 2);
    std::int64_t hi = std::min<std::int64_t>(M - shift, G / 2 - 1);
    return {lo, hi};
}

} // namespace

PartialSumGrid partial_sum_sup(const CharacterField& c, std::int64_t M, std::int64_t N) {
    if (M < 0 || N < 0) throw RangeError("partial sums need M, N >= 0");
    PartialSumGrid g;
    g.M = M;
    g.N = N;
    g.Gs = c.Gs;
    g.Gt = c.Gt;
    const std::size_t total = static_cast<std::size_t>(c.Gs) * c.Gt;
    std::vector<cplx> spec(total, 0.0), out(total);
    auto [klo, khi] = clip_window(M, c.spec.ks, c.Gs);
    auto [llo, lhi] = clip_window(N, c.spec.kt, c.Gt);
    for (std::int64_t k = klo; k <= khi; ++k)
        for (std::int64_t l = llo; l <= lhi; ++l)
            spec[static_cast<std::size_t>(floor_mod(k, c.Gs)) * c.Gt + floor_mod(l, c.Gt)] =
                c.coeffs[static_cast<std::size_t>(k + c.Gs / 2) * c.Gt + (l + c.Gt / 2)];
    fft2d_backward(spec.data(), out.data(), c.Gs, c.Gt);
    g.values.resize(total);
    for (std::size_t q = 0; q < total; ++q) {
        g.values[q] = std::abs(out[q]);
        if (g.values[q] > g.sup) {
            g.sup = g.values[q];
            g.argx = static_cast<double>(q / c.Gt) / c.Gs;
            g.argy = static_cast<double>(q % c.Gt) / c.Gt;
        }
    }
    return g;
}

cplx partial_sum_at(const CharacterField& c, std::int64_t M, std::int64_t N, double x, double y) {
    if (M < 0 || N < 0) throw RangeError("partial sums need M, N >= 0");
    auto [klo, khi] = clip_window(M, c.spec.ks, c.Gs);
    auto [llo, lhi] = clip_window(N, c.spec.kt, c.Gt);
    if (klo > khi || llo > lhi) return 0.0;
    std::vector<cplx> ey(static_cast<std::size_t>(lhi - llo + 1));
    for (std::int64_t l = llo; l <= lhi; ++l) ey[l - llo] = cis_turns(static_cast<double>(l) * y);
    cplx acc = 0.0;
    for (std::int64_t k = klo; k <= khi; ++k) {
        const cplx* row = &c.coeffs[static_cast<std::size_t>(k + c.Gs / 2) * c.Gt + (c.Gt / 2)];
        cplx inner = 0.0;
        for (std::int64_t l = llo; l <= lhi; ++l) inner += row[l] * ey[l - llo];
        acc += inner * cis_turns(static_cast<double>(k) * x);
    }
    // linear part: exp(2 pi i (ks x + kt y)) has modulus one but keeps the value exact
    double lin = static_cast<double>(c.spec.ks) * x + static_cast<double>(c.spec.kt) * y;
    return acc * cis_turns(lin);
}

std::pair<std::int64_t, std::int64_t> tune_MN(const PhaseFamily& f, std::int64_t n, double x,
                                              double y, const std::vector<double>& omega) {
    f.validate();
    std::vector<double> w = omega;
    if (w.empty()) {
        if (f.d() != 1) throw DimMismatch("tune_MN needs omega when d > 1");
        w = {1.0};
    }
    Direction dir(w);
    TrigPoly psi = contract(f, dir);
    auto lat = contract_lattice(f, dir);
    double nd = static_cast<double>(n);
    double A = eval(derive(psi, 1, 0), x, y) + lat[0];
    double B = eval(derive(psi, 0, 1), x, y) + lat[1];
    return {std::llround(std::abs(nd * A)), std::llround(std::abs(nd * B))};
}

} // namespace uconv
