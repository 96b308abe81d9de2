#include "uconv/fhcheck.hpp"

#include "uconv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

namespace uconv {

namespace {

constexpr double kTauZero = 1e-8;
constexpr double kTauSt = 1e-4;
constexpr double kBisectTol = 1e-10;

struct Probe {
    const TrigPoly* second;  // psi_ss or psi_tt
    const TrigPoly* mixed;   // psi_st
    double tau_zero;
    double tau_st;
};

double bisect(const TrigPoly& p, double x0, double y0, double x1, double y1) {
    double f0 = eval(p, x0, y0);
    double lo = 0.0, hi = 1.0;
    while ((hi - lo) * std::max(std::abs(x1 - x0), std::abs(y1 - y0)) > kBisectTol) {
        double mid = 0.5 * (lo + hi);
        double fm = eval(p, x0 + mid * (x1 - x0), y0 + mid * (y1 - y0));
        if (fm == 0.0) return mid;
        if ((fm < 0) == (f0 < 0)) {
            lo = mid;
            f0 = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

const char* to_string(Verdict v) {
    return v == Verdict::Violated ? "VIOLATED" : "NO_WITNESS_FOUND";
}

const char* to_string(Structure s) {
    switch (s) {
    case Structure::Split: return "SPLIT";
    case Structure::Composite: return "COMPOSITE";
    case Structure::Product: return "PRODUCT";
    default: return "GENERIC";
    }
}

std::vector<double> eval_grid(const TrigPoly& p, int g) {
    std::vector<double> cs(g), sn(g);
    for (int i = 0; i < g; ++i) {
        double th = 2.0 * std::numbers::pi * i / g;
        cs[i] = std::cos(th);
        sn[i] = std::sin(th);
    }
    std::vector<double> out(static_cast<std::size_t>(g) * g, 0.0);
    for (const auto& [m, v] : p.terms()) {
        std::int64_t a = ((m[0] % g) + g) % g, b = ((m[1] % g) + g) % g;
        for (int i = 0; i < g; ++i) {
            std::int64_t base = (a * i) % g;
            double* row = &out[static_cast<std::size_t>(i) * g];
            std::int64_t idx = base;
            for (int j = 0; j < g; ++j) {
                row[j] += v.a * cs[idx] + v.b * sn[idx];
                idx += b;
                if (idx >= g) idx -= g;
            }
        }
    }
    return out;
}

std::vector<std::vector<double>> sample_directions(std::size_t d, int count) {
    std::vector<std::vector<double>> out;
    if (d == 1) {
        out.push_back({1.0});
        return out;
    }
    count = std::max(count, 1);
    if (d == 2) {
        // the half circle suffices: psi(-w) = -psi(w)
        for (int k = 0; k < count; ++k) {
            double th = std::numbers::pi * k / count;
            out.push_back({std::cos(th), std::sin(th)});
        }
        return out;
    }
    if (d == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            double z = 1.0 - (2.0 * k + 1.0) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = golden * k;
            out.push_back({r * std::cos(th), r * std::sin(th), z});
        }
        return out;
    }
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (static_cast<int>(out.size()) < count) {
        std::vector<double> w(d);
        double n2 = 0.0;
        for (auto& x : w) {
            x = u(rng);
            n2 += x * x;
        }
        if (n2 > 1.0 || n2 < 1e-6) continue;
        double n = std::sqrt(n2);
        for (auto& x : w) x /= n;
        out.push_back(w);
    }
    return out;
}

bool is_witness(const TrigPoly& psi, double x, double y) {
    TrigPoly st = derive(psi, 1, 1);
    double sst = st.coeff_sum();
    if (sst == 0.0) return false;
    if (std::abs(eval(st, x, y)) < kTauSt * sst) return false;
    for (auto [k, l] : {std::pair{2, 0}, std::pair{0, 2}}) {
        TrigPoly d2 = derive(psi, k, l);
        if (std::abs(eval(d2, x, y)) <= kTauZero * d2.coeff_sum()) return true;
    }
    return false;
}

FHReport witness_search(const PhaseFamily& f, int grid_n, int omega_samples) {
    f.validate();
    if (grid_n < 64) throw RangeError("witness_search needs grid_n >= 64");
    FHReport rep;
    rep.grid_n = grid_n;
    rep.spacing = 1.0 / grid_n;
    rep.bisect_tol = kBisectTol;
    rep.tau_zero_rel = kTauZero;
    rep.tau_st_rel = kTauSt;
    if (f.d() == 1) {
        omega_samples = 1;
        rep.omega_skipped = 1;
    }
    auto dirs = sample_directions(f.d(), omega_samples);
    rep.omega_samples = static_cast<int>(dirs.size());

    const int g = grid_n;
    std::set<std::tuple<long long, long long, int, std::size_t>> seen;
    for (std::size_t wi = 0; wi < dirs.size(); ++wi) {
        TrigPoly psi = contract(f, Direction(dirs[wi]));
        TrigPoly ss = derive(psi, 2, 0), tt = derive(psi, 0, 2), st = derive(psi, 1, 1);
        double sc_st = st.coeff_sum();
        double sc_2 = std::max(ss.coeff_sum(), tt.coeff_sum());
        if (sc_st == 0.0 || sc_st < 1e-12 * sc_2) continue;
        const double tau_st = kTauSt * sc_st;

        for (int which = 0; which < 2; ++which) {
            const TrigPoly& sec = which == 0 ? tt : ss;
            const char* axis = which == 0 ? "tt" : "ss";
            const double tau_zero = kTauZero * sec.coeff_sum();
            if (sec.is_zero()) continue;
            auto vals = eval_grid(sec, g);
            auto at = [&](int i, int j) { return vals[static_cast<std::size_t>(i) * g + j]; };

            auto accept = [&](double x, double y) {
                x -= std::floor(x);
                y -= std::floor(y);
                double r = std::abs(eval(sec, x, y));
                if (r > tau_zero) return;
                double vst = eval(st, x, y);
                if (std::abs(vst) < tau_st) return;
                auto key = std::make_tuple(std::llround(x * 1e9), std::llround(y * 1e9), which, wi);
                if (!seen.insert(key).second) return;
                rep.witnesses.push_back(Witness{x, y, dirs[wi], axis, vst, r});
            };

            for (int i = 0; i < g; ++i) {
                for (int j = 0; j < g; ++j) {
                    double x = double(i) / g, y = double(j) / g;
                    double v = at(i, j);
                    if (std::abs(v) <= tau_zero) {
                        accept(x, y);
                        continue;
                    }
                    // along s (next i) and along t (next j)
                    int ni = (i + 1) % g, nj = (j + 1) % g;
                    double vs = at(ni, j), vt = at(i, nj);
                    if (std::abs(vs) > tau_zero && (vs < 0) != (v < 0)) {
                        double u = bisect(sec, x, y, x + 1.0 / g, y);
                        accept(x + u / g, y);
                    }
                    if (std::abs(vt) > tau_zero && (vt < 0) != (v < 0)) {
                        double u = bisect(sec, x, y, x, y + 1.0 / g);
                        accept(x, y + u / g);
                    }
                }
            }
        }
    }
    if (!rep.witnesses.empty()) rep.verdict = Verdict::Violated;
    return rep;
}

Structure structural_classify(const PhaseFamily& f) {
    f.validate();
    if (f.d() != 1) throw DimMismatch("structural_classify expects d = 1");
    const TrigPoly& p = f.components[0];

    std::vector<Freq> supp;
    for (const auto& [m, v] : p.terms())
        if (m[0] != 0 || m[1] != 0) supp.push_back(m);
    if (std::all_of(supp.begin(), supp.end(), [](const Freq& m) { return m[0] == 0 || m[1] == 0; }))
        return Structure::Split;
    const Freq& m0 = supp.front();
    if (std::all_of(supp.begin(), supp.end(),
                    [&](const Freq& m) { return m[0] * m0[1] - m[1] * m0[0] == 0; }))
        return Structure::Composite;

    // Tensor coefficients over {1, cos 2pi p s, sin 2pi p s} x {1, cos 2pi q t, sin 2pi q t}.
    // Basis key (p, kind) with kind 0 = cos (or constant), 1 = sin.
    using Key = std::pair<std::int64_t, int>;
    std::map<Key, std::map<Key, double>> c;
    double scale = 0.0;
    for (const auto& [m, v] : p.terms()) {
        std::int64_t ps = m[0], qt = std::llabs(m[1]);
        double sg = m[1] < 0 ? -1.0 : 1.0;  // sin(-B) = -sin(B)
        auto put = [&](Key a, Key b, double x) {
            if (x != 0.0) c[a][b] += x;
        };
        if (ps == 0 || qt == 0) {
            // pure s, pure t, or constant term
            if (ps == 0) {
                put(Key{0, 0}, Key{qt, 0}, v.a);
                put(Key{0, 0}, Key{qt, 1}, v.b * sg);
            } else {
                put(Key{ps, 0}, Key{0, 0}, v.a);
                put(Key{ps, 1}, Key{0, 0}, v.b);
            }
        } else {
            // cos(A + B) = cA cB - sA sB;  sin(A + B) = sA cB + cA sB, with sB carrying sg
            put(Key{ps, 0}, Key{qt, 0}, v.a);
            put(Key{ps, 1}, Key{qt, 1}, -v.a * sg);
            put(Key{ps, 1}, Key{qt, 0}, v.b);
            put(Key{ps, 0}, Key{qt, 1}, v.b * sg);
        }
        scale = std::max(scale, std::abs(v.a) + std::abs(v.b));
    }
    std::vector<Key> rows, cols;
    std::set<Key> colset;
    for (const auto& [rk, row] : c) {
        rows.push_back(rk);
        for (const auto& [ck, x] : row) colset.insert(ck);
    }
    cols.assign(colset.begin(), colset.end());
    auto get = [&](const Key& r, const Key& k) {
        auto it = c[r].find(k);
        return it == c[r].end() ? 0.0 : it->second;
    };
    const double tol = 1e-12 * scale * scale;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            for (std::size_t k = 0; k < cols.size(); ++k)
                for (std::size_t l = k + 1; l < cols.size(); ++l) {
                    double minor = get(rows[i], cols[k]) * get(rows[j], cols[l]) -
                                   get(rows[i], cols[l]) * get(rows[j], cols[k]);
                    if (std::abs(minor) > tol) return Structure::Generic;
                }
    bool s_nonconst = false, t_nonconst = false;
    for (const auto& r : rows)
        for (const auto& k : cols)
            if (std::abs(get(r, k)) > 1e-14 * scale) {
                if (r.first > 0) s_nonconst = true;
                if (k.first > 0) t_nonconst = true;
            }
    return s_nonconst && t_nonconst ? Structure::Product : Structure::Generic;
}

} // namespace uconv
