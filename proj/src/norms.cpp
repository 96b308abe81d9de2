#include "uconv/norms.hpp"

#include "uconv/errors.hpp"
#include "uconv/fhcheck.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>
#include <set>

namespace uconv {

const char* to_string(NormMode m) { return m == NormMode::Rect ? "rect" : "sq"; }

NormMode parse_norm_mode(const std::string& s) {
    if (s == "rect") return NormMode::Rect;
    if (s == "sq") return NormMode::Sq;
    throw ConfigError("mode must be rect or sq, got '" + s + "'");
}

namespace {

std::int64_t pow2_at_least(std::int64_t x) {
    std::int64_t p = 1;
    while (p < x) p *= 2;
    return p;
}

std::vector<std::int64_t> dyadic_list(std::int64_t Mmax) {
    std::vector<std::int64_t> d;
    for (std::int64_t m = 1; m < Mmax; m *= 2) d.push_back(m);
    d.push_back(Mmax);
    return d;
}

std::pair<std::int64_t, std::int64_t> tune_spec(const CharacterSpec& spec, double x, double y) {
    double A = eval(derive(spec.phase, 1, 0), x, y) + static_cast<double>(spec.ks);
    double B = eval(derive(spec.phase, 0, 1), x, y) + static_cast<double>(spec.kt);
    return {std::llround(std::abs(A)), std::llround(std::abs(B))};
}

struct Candidates {
    StreamPlan plan;
    std::size_t grid_points = 0;
};

// second-derivative size along an axis, in cycles per unit squared
double curvature_bound(const TrigPoly& phase, int axis) {
    double b = 0.0;
    for (const auto& [m, v] : phase.terms()) {
        double k = static_cast<double>(m[axis]);
        b += k * k * (std::abs(v.a) + std::abs(v.b));
    }
    return 4.0 * std::numbers::pi * std::numbers::pi * b;
}

std::vector<std::int64_t> shifted(const std::vector<std::int64_t>& offs, std::int64_t centre,
                                  const std::vector<std::int64_t>& extra) {
    std::vector<std::int64_t> v;
    for (auto o : offs) v.push_back(std::max<std::int64_t>(centre + o, 0));
    v.insert(v.end(), extra.begin(), extra.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

Candidates make_plan(const CharacterSpec& spec, NormMode mode, const NormStrategy& s, std::int64_t Mmax,
                     const std::vector<StreamPoint>& priority) {
    Candidates c;
    StreamPlan& plan = c.plan;
    plan.P = s.P;
    std::vector<std::int64_t> D = s.dyadic ? dyadic_list(Mmax) : std::vector<std::int64_t>{};
    if (mode == NormMode::Rect) {
        for (auto M : D)
            for (auto N : D) plan.shared.emplace_back(M, N);
    } else {
        for (auto M : D) plan.shared.emplace_back(M, M);
    }
    for (int ix = 0; ix < s.P; ++ix)
        for (int iy = 0; iy < s.P; ++iy)
            plan.points.push_back({static_cast<double>(ix) / s.P, static_cast<double>(iy) / s.P});
    c.grid_points = plan.points.size();
    std::vector<char> prio(plan.points.size(), 0);
    for (const auto& p : priority) {
        double x = p.x - std::floor(p.x), y = p.y - std::floor(p.y);
        std::size_t at = plan.points.size();
        for (std::size_t q = 0; q < plan.points.size(); ++q)
            if (std::abs(plan.points[q].x - x) < 1e-12 && std::abs(plan.points[q].y - y) < 1e-12) at = q;
        if (at == plan.points.size()) {
            plan.points.push_back({x, y});
            prio.push_back(1);
        } else {
            prio[at] = 1;
        }
    }

    const auto core = offset_set(s.W, 0.0, s.offset_ratio);
    const auto dense_s = offset_set(s.W, 2.0 * std::sqrt(curvature_bound(spec.phase, 0)) + 16.0, s.offset_ratio);
    const auto dense_t = offset_set(s.W, 2.0 * std::sqrt(curvature_bound(spec.phase, 1)) + 16.0, s.offset_ratio);
    const std::vector<std::int64_t> none;

    for (std::size_t p = 0; p < plan.points.size(); ++p) {
        const bool on_grid = p < c.grid_points;
        const int ip = static_cast<int>(p);
        if (!s.tuned) {
            if (on_grid) continue;
            if (mode == NormMode::Rect) {
                plan.blocks.push_back({ip, D, D});
            } else {
                for (auto M : D) plan.queries.push_back({ip, M, M});
            }
            continue;
        }
        auto [Ms, Ns] = tune_spec(spec, plan.points[p].x, plan.points[p].y);
        const auto& os = prio[p] ? dense_s : core;
        const auto& ot = prio[p] ? dense_t : core;
        std::set<std::pair<std::int64_t, std::int64_t>> diag;
        for (auto M : shifted(os, Ms, none)) diag.emplace(M, M);
        for (auto N : shifted(ot, Ns, none)) diag.emplace(N, N);
        if (!on_grid)
            for (auto M : D) diag.emplace(M, M);
        if (mode == NormMode::Rect) {
            plan.blocks.push_back({ip, shifted(os, Ms, D), shifted(ot, Ns, D)});
        }
        for (const auto& [M, N] : diag) plan.queries.push_back({ip, M, N});
    }
    return c;
}

} // namespace

std::vector<std::int64_t> offset_set(int W, double cap, double ratio) {
    if (W < 0) throw RangeError("W must be >= 0");
    if (!(ratio > 1.0)) throw RangeError("offset ratio must exceed 1");
    std::vector<std::int64_t> v;
    for (int o = -W; o <= W; ++o) v.push_back(o);
    for (double m = 1.0; m <= cap; m *= ratio) {
        auto r = std::llround(m);
        if (r > W) {
            v.push_back(r);
            v.push_back(-r);
        }
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<StreamPoint> critical_points(const CharacterSpec& spec, int limit) {
    constexpr int g = 64;
    const TrigPoly& ph = spec.phase;
    const TrigPoly ps = derive(ph, 1, 0), pt = derive(ph, 0, 1);
    const TrigPoly pss = derive(ph, 2, 0), ptt = derive(ph, 0, 2), pst = derive(ph, 1, 1);
    const TrigPoly psss = derive(ph, 3, 0), psst = derive(ph, 2, 1), pstt = derive(ph, 1, 2),
                   pttt = derive(ph, 0, 3);
    struct Fn {
        const TrigPoly* f;
        double shift;
        const TrigPoly* fs;
        const TrigPoly* ft;
    };
    const Fn as[2] = {{&ps, static_cast<double>(spec.ks), &pss, &pst}, {&pss, 0.0, &psss, &psst}};
    const Fn bs[2] = {{&pt, static_cast<double>(spec.kt), &pst, &ptt}, {&ptt, 0.0, &pstt, &pttt}};
    std::vector<StreamPoint> out;
    const int per_combo = std::max(1, limit / 4);
    for (const auto& A : as) {
        std::vector<double> ga = eval_grid(*A.f, g);
        for (double& v : ga) v += A.shift;
        for (const auto& B : bs) {
            std::vector<double> gb = eval_grid(*B.f, g);
            for (double& v : gb) v += B.shift;
            const double scale = 1.0 + A.f->coeff_sum() + B.f->coeff_sum() + std::abs(A.shift) + std::abs(B.shift);
            std::vector<StreamPoint> found;
            for (int i = 0; i < g; ++i)
                for (int j = 0; j < g; ++j) {
                    auto at = [&](const std::vector<double>& v, int di, int dj) {
                        return v[static_cast<std::size_t>((i + di) % g) * g + (j + dj) % g];
                    };
                    auto straddles = [&](const std::vector<double>& v) {
                        double lo = std::min({at(v, 0, 0), at(v, 1, 0), at(v, 0, 1), at(v, 1, 1)});
                        double hi = std::max({at(v, 0, 0), at(v, 1, 0), at(v, 0, 1), at(v, 1, 1)});
                        return lo <= 0.0 && hi >= 0.0;
                    };
                    if (!straddles(ga) || !straddles(gb)) continue;
                    double x = (i + 0.5) / g, y = (j + 0.5) / g;
                    bool ok = false;
                    for (int it = 0; it < 60; ++it) {
                        Eigen::Vector2d F(eval(*A.f, x, y) + A.shift, eval(*B.f, x, y) + B.shift);
                        if (F.norm() <= 1e-11 * scale) {
                            ok = true;
                            break;
                        }
                        Eigen::Matrix2d J;
                        J << eval(*A.fs, x, y), eval(*A.ft, x, y), eval(*B.fs, x, y), eval(*B.ft, x, y);
                        // minimum-norm step also handles curves of common zeros
                        Eigen::JacobiSVD<Eigen::Matrix2d> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
                        svd.setThreshold(1e-10);
                        Eigen::Vector2d step = svd.solve(-F);
                        x += step(0);
                        y += step(1);
                    }
                    if (!ok) continue;
                    x -= std::floor(x);
                    y -= std::floor(y);
                    // snap values that are grid-exact up to rounding
                    for (double* v : {&x, &y}) {
                        double r = std::nearbyint(*v * 1024.0) / 1024.0;
                        if (std::abs(*v - r) < 1e-12) *v = r >= 1.0 ? 0.0 : r;
                    }
                    bool dup = false;
                    for (const auto& q : found)
                        if (std::abs(q.x - x) < 1e-9 && std::abs(q.y - y) < 1e-9) dup = true;
                    if (!dup) found.push_back({x, y});
                }
            std::sort(found.begin(), found.end(),
                      [](const StreamPoint& a, const StreamPoint& b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
            for (int k = 0; k < std::min<int>(per_combo, static_cast<int>(found.size())); ++k) {
                bool dup = false;
                for (const auto& q : out)
                    if (std::abs(q.x - found[k].x) < 1e-9 && std::abs(q.y - found[k].y) < 1e-9) dup = true;
                if (!dup) out.push_back(found[k]);
            }
        }
    }
    return out;
}

std::vector<StreamPoint> witness_points(const PhaseFamily& f, const std::vector<double>& omega,
                                        int grid_n, int limit) {
    std::vector<double> w = omega.empty() ? std::vector<double>{1.0} : omega;
    Direction dir(w);
    PhaseFamily one;
    one.name = f.name;
    one.components = {contract(f, dir)};
    one.lattice = {{0, 0}};
    FHReport rep = witness_search(one, grid_n, 1);
    std::vector<StreamPoint> out;
    for (const auto& wt : rep.witnesses) {
        if (static_cast<int>(out.size()) >= limit) break;
        out.push_back({wt.x, wt.y});
    }
    return out;
}

NormEstimate estimate_norm(const CharacterSpec& spec, NormMode mode, const NormStrategy& s,
                           const std::vector<StreamPoint>& witnesses) {
    if (s.P < 1 || (s.P & (s.P - 1)) != 0) throw RangeError("P must be a power of two");
    if (s.W < 0) throw RangeError("W must be >= 0");
    const bool automatic = s.G == 0;
    int Gs = s.G, Gt = s.G;
    if (automatic) {
        Gs = std::max(choose_grid(spec.phase, 0, 0), s.P);
        Gt = std::max(choose_grid(spec.phase, 1, 0), s.P);
    }
    std::vector<StreamPoint> extra = s.points;
    extra.insert(extra.end(), witnesses.begin(),
                 witnesses.begin() + std::min<std::size_t>(witnesses.size(), std::max(0, s.witness_limit)));
    if (s.critical && s.critical_limit > 0) {
        auto cp = critical_points(spec, s.critical_limit);
        extra.insert(extra.end(), cp.begin(), cp.end());
    }
    for (;;) {
        std::int64_t Mmax = s.Mmax;
        if (Mmax <= 0)
            Mmax = pow2_at_least(std::max(std::llabs(spec.ks) + Gs / 2, std::llabs(spec.kt) + Gt / 2));
        Candidates c = make_plan(spec, mode, s, Mmax, extra);
        StreamResult r = stream_partial_sums(spec, Gs, Gt, c.plan, s.jobs);
        if (r.tail_mass > kAliasTol) {
            if (automatic && (Gs < kMaxGrid || Gt < kMaxGrid)) {
                Gs = std::min(2 * Gs, kMaxGrid);
                Gt = std::min(2 * Gt, kMaxGrid);
                continue;
            }
            throw AliasGuardFailed("alias guard: tail mass " + std::to_string(r.tail_mass) + " at G=" +
                                       std::to_string(Gs) + "x" + std::to_string(Gt),
                                   r.tail_mass);
        }
        NormEstimate e;
        e.Mmax = Mmax;
        e.Gs = Gs;
        e.Gt = Gt;
        e.tail_mass = r.tail_mass;
        e.parseval = r.parseval;
        const std::size_t ns = c.plan.shared.size();
        const int P = c.plan.P;
        for (int ix = 0; ix < P; ++ix)
            for (int iy = 0; iy < P; ++iy)
                for (std::size_t p = 0; p < ns; ++p) {
                    double v = r.shared_values[(static_cast<std::size_t>(ix) * P + iy) * ns + p];
                    if (v > e.norm) {
                        e.norm = v;
                        e.M = c.plan.shared[p].first;
                        e.N = c.plan.shared[p].second;
                        e.x = static_cast<double>(ix) / P;
                        e.y = static_cast<double>(iy) / P;
                    }
                }
        for (std::size_t q = 0; q < c.plan.queries.size(); ++q) {
            double v = r.query_values[q];
            if (v > e.norm) {
                const auto& Q = c.plan.queries[q];
                e.norm = v;
                e.M = Q.M;
                e.N = Q.N;
                e.x = c.plan.points[Q.point].x;
                e.y = c.plan.points[Q.point].y;
            }
        }
        e.pairs = static_cast<std::size_t>(P) * P * ns + c.plan.queries.size();
        for (std::size_t b = 0; b < c.plan.blocks.size(); ++b) {
            const auto& B = c.plan.blocks[b];
            const auto& v = r.block_values[b];
            e.pairs += v.size();
            for (std::size_t i = 0; i < B.Ms.size(); ++i)
                for (std::size_t k = 0; k < B.Ns.size(); ++k) {
                    double val = v[i * B.Ns.size() + k];
                    if (val > e.norm) {
                        e.norm = val;
                        e.M = B.Ms[i];
                        e.N = B.Ns[k];
                        e.x = c.plan.points[B.point].x;
                        e.y = c.plan.points[B.point].y;
                    }
                }
        }
        return e;
    }
}

namespace {

NormEstimate estimate_family(const PhaseFamily& f, const std::vector<std::int64_t>& nvec, NormMode mode,
                             const NormStrategy& s) {
    CharacterSpec spec = make_character_spec(f, nvec);
    std::vector<StreamPoint> wit;
    if (s.use_witnesses && s.witness_limit > 0) {
        std::vector<double> omega(nvec.begin(), nvec.end());
        double norm = std::sqrt(std::inner_product(omega.begin(), omega.end(), omega.begin(), 0.0));
        if (norm > 0.0) {
            for (auto& w : omega) w /= norm;
            wit = witness_points(f, omega, s.witness_grid, s.witness_limit);
        }
    }
    return estimate_norm(spec, mode, s, wit);
}

} // namespace

NormEstimate urect_estimate(const PhaseFamily& f, std::int64_t n, const NormStrategy& s) {
    if (f.d() != 1) throw DimMismatch("scalar n needs d = 1; pass an integer vector");
    return estimate_family(f, {n}, NormMode::Rect, s);
}

NormEstimate usq_estimate(const PhaseFamily& f, std::int64_t n, const NormStrategy& s) {
    if (f.d() != 1) throw DimMismatch("scalar n needs d = 1; pass an integer vector");
    return estimate_family(f, {n}, NormMode::Sq, s);
}

NormEstimate urect_estimate(const PhaseFamily& f, const std::vector<std::int64_t>& nvec,
                            const NormStrategy& s) {
    return estimate_family(f, nvec, NormMode::Rect, s);
}

NormEstimate usq_estimate(const PhaseFamily& f, const std::vector<std::int64_t>& nvec,
                          const NormStrategy& s) {
    return estimate_family(f, nvec, NormMode::Sq, s);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw RangeError("fit_line needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    // a flat curve is explained perfectly
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::vector<std::int64_t> lattice_direction(const std::vector<double>& omega, double radius) {
    if (omega.empty()) throw DimMismatch("empty direction");
    Direction dir(omega);
    const auto& w = dir.omega;
    std::vector<std::int64_t> best;
    double best_err = 1e300;
    for (std::int64_t q = 1; q <= static_cast<std::int64_t>(radius); ++q) {
        std::vector<std::int64_t> v(w.size());
        double nn = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = std::llround(static_cast<double>(q) * w[i]);
            nn += static_cast<double>(v[i]) * static_cast<double>(v[i]);
            dot += static_cast<double>(v[i]) * w[i];
        }
        if (nn == 0.0 || nn > radius * radius) continue;
        // squared sine of the angle to omega
        double err = 1.0 - dot * dot / nn;
        if (err < best_err - 1e-15) {
            best_err = err;
            best = v;
        }
    }
    if (best.empty()) throw RangeError("no integer vector within radius");
    return best;
}

NormCurve growth_curve(const PhaseFamily& f, const std::vector<std::int64_t>& n_list, NormMode mode,
                       const NormStrategy& s, const std::vector<double>& omega) {
    f.validate();
    if (n_list.size() < 4) throw RangeError("growth_curve needs at least 4 values of n");
    if (!std::is_sorted(n_list.begin(), n_list.end()) || n_list.front() < 1)
        throw RangeError("n_list must be positive and sorted ascending");
    std::vector<std::int64_t> v{1};
    std::vector<double> w{1.0};
    if (f.d() > 1) {
        if (omega.size() != f.d()) throw DimMismatch("growth_curve needs omega of length d");
        v = lattice_direction(omega);
        double nv = 0.0;
        for (auto c : v) nv += static_cast<double>(c) * static_cast<double>(c);
        w.assign(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = static_cast<double>(v[i]) / std::sqrt(nv);
    }
    std::vector<StreamPoint> wit;
    if (s.use_witnesses && s.witness_limit > 0) wit = witness_points(f, w, s.witness_grid, s.witness_limit);

    NormCurve curve;
    curve.family = f.name;
    curve.mode = mode;
    for (auto n : n_list) {
        std::vector<std::int64_t> nvec(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) nvec[i] = n * v[i];
        CurvePoint cp;
        cp.n = n;
        cp.est = estimate_norm(make_character_spec(f, nvec), mode, s, wit);
        curve.points.push_back(cp);
    }
    curve.fit_begin = n_list.size() / 2;
    std::vector<double> x, y;
    for (std::size_t i = curve.fit_begin; i < curve.points.size(); ++i) {
        x.push_back(std::log(static_cast<double>(curve.points[i].n)));
        y.push_back(curve.points[i].est.norm);
    }
    curve.fit = fit_line(x, y);
    return curve;
}

PointValue tuned_point_value(const PhaseFamily& f, std::int64_t n, double x, double y, NormMode mode,
                             int W, int jobs) {
    CharacterSpec spec = make_character_spec(f, n);
    int Gs = std::max(choose_grid(spec.phase, 0, 0), 16);
    int Gt = std::max(choose_grid(spec.phase, 1, 0), 16);
    StreamPlan plan;
    plan.points = {{x, y}};
    auto [Ms, Ns] = tune_spec(spec, x, y);
    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    for (int a = -W; a <= W; ++a) {
        if (mode == NormMode::Sq) {
            pairs.emplace(std::max<std::int64_t>(Ms + a, 0), std::max<std::int64_t>(Ms + a, 0));
            pairs.emplace(std::max<std::int64_t>(Ns + a, 0), std::max<std::int64_t>(Ns + a, 0));
        } else {
            for (int b = -W; b <= W; ++b)
                pairs.emplace(std::max<std::int64_t>(Ms + a, 0), std::max<std::int64_t>(Ns + b, 0));
        }
    }
    for (const auto& [M, N] : pairs) plan.queries.push_back({0, M, N});
    for (;;) {
        StreamResult r = stream_partial_sums(spec, Gs, Gt, plan, jobs);
        if (r.tail_mass > kAliasTol) {
            if (Gs < kMaxGrid || Gt < kMaxGrid) {
                Gs = std::min(2 * Gs, kMaxGrid);
                Gt = std::min(2 * Gt, kMaxGrid);
                continue;
            }
            throw AliasGuardFailed("alias guard: tail mass " + std::to_string(r.tail_mass), r.tail_mass);
        }
        PointValue pv;
        for (std::size_t q = 0; q < plan.queries.size(); ++q)
            if (r.query_values[q] > pv.value) {
                pv.value = r.query_values[q];
                pv.M = plan.queries[q].M;
                pv.N = plan.queries[q].N;
            }
        return pv;
    }
}

} // namespace uconv
