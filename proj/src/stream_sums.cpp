#include "uconv/stream_sums.hpp"

#include "uconv/errors.hpp"
#include "uconv/fft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>

namespace uconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kChunks = 64;
constexpr int kTailColumns = 64;
constexpr int kBatch = 256;

using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

bool is_pow2(int g) { return g >= 1 && (g & (g - 1)) == 0; }

struct Window {
    std::int64_t lo, hi;
    bool empty() const { return lo > hi; }
};

Window clip(std::int64_t M, std::int64_t shift, int G) {
    return {std::max<std::int64_t>(-M - shift, -G / 2), std::min<std::int64_t>(M - shift, G / 2 - 1)};
}

// e^{2 pi i frac} for a long double turn count
cplx cis_ld(long double turns) {
    long double r = turns - std::floor(turns);
    return cis_turns(static_cast<double>(r));
}

// (1/G) sum_{l=a}^{b} e^{2 pi i l theta}, theta in turns
cplx dirichlet_window(std::int64_t a, std::int64_t b, long double theta, int G) {
    long double r = theta - std::nearbyint(theta);
    long double cnt = static_cast<long double>(b - a + 1);
    if (std::fabs(static_cast<double>(r)) < 1e-300) return cplx(static_cast<double>(cnt) / G, 0.0);
    // sin(pi c r) / sin(pi r) with c r reduced modulo 2
    long double cr = cnt * r;
    cr -= 2.0L * std::floor(cr / 2.0L);
    double num = std::sin(std::numbers::pi * static_cast<double>(cr));
    double den = std::sin(std::numbers::pi * static_cast<double>(r));
    cplx mid = cis_ld(0.5L * static_cast<long double>(a + b) * r);
    return mid * (num / den / G);
}

struct SKey {
    int xkey;  // 0..P-1 grid column, P + id for off-grid x
    std::int64_t lo, hi;
    auto operator<=>(const SKey&) const = default;
};

struct TKey {
    std::int64_t ykey;  // root index 0..Gt-1, or Gt + id for off-grid y
    std::int64_t lo, hi;
    auto operator<=>(const TKey&) const = default;
};

} // namespace

StreamResult stream_partial_sums(const CharacterSpec& spec, int Gs, int Gt, const StreamPlan& plan,
                                 int jobs) {
    const int P = plan.P;
    if (!is_pow2(Gs) || !is_pow2(Gt) || !is_pow2(P) || P > Gs || P > Gt)
        throw RangeError("stream grid sizes must be powers of two with P <= Gs, Gt");
    jobs = std::max(1, jobs);

    // --- classify points
    std::vector<long double> off_x, off_y;
    struct PointKeys {
        int xkey;
        std::int64_t ykey;
    };
    std::vector<PointKeys> pkeys;
    for (const auto& p : plan.points) {
        double x = p.x - std::floor(p.x), y = p.y - std::floor(p.y);
        PointKeys k{};
        double gx = x * P;
        if (std::abs(gx - std::nearbyint(gx)) < 1e-12) {
            k.xkey = static_cast<int>(floor_mod(std::llround(gx), P));
        } else {
            auto it = std::find(off_x.begin(), off_x.end(), static_cast<long double>(x));
            k.xkey = P + static_cast<int>(it - off_x.begin());
            if (it == off_x.end()) off_x.push_back(x);
        }
        double gy = y * Gt;
        if (std::abs(gy - std::nearbyint(gy)) < 1e-9) {
            k.ykey = floor_mod(std::llround(gy), Gt);
        } else {
            auto it = std::find(off_y.begin(), off_y.end(), static_cast<long double>(y));
            k.ykey = Gt + (it - off_y.begin());
            if (it == off_y.end()) off_y.push_back(y);
        }
        pkeys.push_back(k);
    }

    // --- window keys
    std::map<SKey, int> sid;
    std::map<TKey, int> tid;
    auto s_id = [&](int xkey, Window w) {
        if (w.empty()) return -1;
        auto [it, fresh] = sid.emplace(SKey{xkey, w.lo, w.hi}, static_cast<int>(sid.size()));
        return it->second;
    };
    auto t_id = [&](std::int64_t ykey, Window w) {
        if (w.empty()) return -1;
        auto [it, fresh] = tid.emplace(TKey{ykey, w.lo, w.hi}, static_cast<int>(tid.size()));
        return it->second;
    };

    // shared windows: distinct clipped ranges
    std::vector<Window> shared_kw, shared_lw;
    std::vector<std::pair<int, int>> shared_idx;  // per pair: (kw, lw) or -1
    auto index_of_window = [](std::vector<Window>& v, Window w) {
        if (w.empty()) return -1;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i].lo == w.lo && v[i].hi == w.hi) return static_cast<int>(i);
        v.push_back(w);
        return static_cast<int>(v.size() - 1);
    };
    for (const auto& [M, N] : plan.shared) {
        if (M < 0 || N < 0) throw RangeError("partial sums need M, N >= 0");
        int a = index_of_window(shared_kw, clip(M, spec.ks, Gs));
        int b = index_of_window(shared_lw, clip(N, spec.kt, Gt));
        shared_idx.emplace_back(a, b);
    }
    // s-keys of shared windows for every grid column
    std::vector<int> shared_sid(static_cast<std::size_t>(P) * shared_kw.size());
    for (int ix = 0; ix < P; ++ix)
        for (std::size_t w = 0; w < shared_kw.size(); ++w)
            shared_sid[ix * shared_kw.size() + w] = s_id(ix, shared_kw[w]);

    struct QRef {
        int s, t;
    };
    std::vector<QRef> qref;
    for (const auto& q : plan.queries) {
        if (q.point < 0 || q.point >= static_cast<int>(plan.points.size()))
            throw RangeError("query refers to an unknown point");
        if (q.M < 0 || q.N < 0) throw RangeError("partial sums need M, N >= 0");
        const auto& pk = pkeys[q.point];
        int s = s_id(pk.xkey, clip(q.M, spec.ks, Gs));
        int t = t_id(pk.ykey, clip(q.N, spec.kt, Gt));
        qref.push_back({s, t});
    }
    struct BRef {
        std::vector<int> s, t;
    };
    std::vector<BRef> bref;
    for (const auto& b : plan.blocks) {
        if (b.point < 0 || b.point >= static_cast<int>(plan.points.size()))
            throw RangeError("block refers to an unknown point");
        const auto& pk = pkeys[b.point];
        BRef r;
        for (auto M : b.Ms) {
            if (M < 0) throw RangeError("partial sums need M, N >= 0");
            r.s.push_back(s_id(pk.xkey, clip(M, spec.ks, Gs)));
        }
        for (auto N : b.Ns) {
            if (N < 0) throw RangeError("partial sums need M, N >= 0");
            r.t.push_back(t_id(pk.ykey, clip(N, spec.kt, Gt)));
        }
        bref.push_back(std::move(r));
    }

    std::vector<SKey> skeys(sid.size());
    for (const auto& [k, v] : sid) skeys[v] = k;
    std::vector<TKey> tkeys(tid.size());
    for (const auto& [k, v] : tid) tkeys[v] = k;

    // boundaries: prefix sums are taken at hi and lo - 1
    const int nOff = static_cast<int>(off_x.size());
    std::vector<std::vector<std::int64_t>> bounds(1 + nOff);
    for (const auto& k : skeys) {
        auto& b = bounds[k.xkey < P ? 0 : 1 + (k.xkey - P)];
        b.push_back(k.hi);
        b.push_back(k.lo - 1);
    }
    for (auto& b : bounds) {
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }
    auto bpos = [&](int group, std::int64_t K) {
        const auto& b = bounds[group];
        return static_cast<int>(std::lower_bound(b.begin(), b.end(), K) - b.begin());
    };
    struct SPlan {
        int group, hi, lo;
    };
    std::vector<SPlan> splan;
    for (const auto& k : skeys) {
        int g = k.xkey < P ? 0 : 1 + (k.xkey - P);
        splan.push_back({g, bpos(g, k.hi), bpos(g, k.lo - 1)});
    }

    // --- tables
    const int Gm = std::max(Gs, Gt);
    std::vector<double> cs(Gm), sn(Gm);
    for (int i = 0; i < Gm; ++i) {
        cs[i] = std::cos(kTwoPi * i / Gm);
        sn[i] = std::sin(kTwoPi * i / Gm);
    }
    struct Term {
        std::int64_t stride_s, stride_t;
        double a, b;
    };
    std::vector<Term> terms;
    for (const auto& [m, v] : spec.phase.terms())
        terms.push_back({floor_mod(m[0] * (Gm / Gs), Gm), floor_mod(m[1] * (Gm / Gt), Gm), v.a, v.b});
    std::vector<cplx> rootP(P), rootT(Gt), inv_one_minus(Gt);
    for (int r = 0; r < P; ++r) rootP[r] = std::polar(1.0, kTwoPi * r / P);
    for (int m = 0; m < Gt; ++m) {
        rootT[m] = std::polar(1.0, kTwoPi * m / Gt);
        inv_one_minus[m] = m == 0 ? cplx(0.0) : 1.0 / (1.0 - rootT[m]);
    }

    const std::size_t nShK = shared_kw.size();
    std::vector<cplx> D(static_cast<std::size_t>(P) * nShK * Gt);

    const int chunks = std::min(kChunks, Gt);
    const std::size_t nq = qref.size(), nb = bref.size();

    struct ChunkResult {
        std::vector<cplx> q;
        std::vector<CMat> blocks;
        double energy = 0.0, tail = 0.0;
    };
    auto empty_result = [&]() {
        ChunkResult r;
        r.q.assign(nq, 0.0);
        for (const auto& b : bref) r.blocks.push_back(CMat::Zero(b.s.size(), b.t.size()));
        return r;
    };
    // chunks are folded in index order whatever the thread count
    ChunkResult total = empty_result();
    std::map<int, ChunkResult> pending;
    int next_merge = 0;
    std::mutex merge_mu;
    auto merge = [&](int c, ChunkResult&& r) {
        std::lock_guard<std::mutex> lock(merge_mu);
        pending.emplace(c, std::move(r));
        for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
            ChunkResult& x = it->second;
            for (std::size_t q = 0; q < nq; ++q) total.q[q] += x.q[q];
            for (std::size_t b = 0; b < nb; ++b) total.blocks[b] += x.blocks[b];
            total.energy += x.energy;
            total.tail += x.tail;
            pending.erase(it);
            ++next_merge;
        }
    };

    Fft1d fft_s(Gs, true);
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;

    auto worker = [&]() {
        try {
            std::vector<double> ph(Gs);
            std::vector<cplx> row(Gs);
            std::vector<std::vector<cplx>> snap(1 + nOff);
            snap[0].assign(bounds[0].size() * P, 0.0);
            for (int o = 0; o < nOff; ++o) snap[1 + o].assign(bounds[1 + o].size(), 0.0);
            std::vector<cplx> A(skeys.size()), K(tkeys.size());
            std::vector<cplx> R(P);
            std::vector<CMat> Ab(nb), Kb(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                Ab[b].resize(kBatch, static_cast<Eigen::Index>(bref[b].s.size()));
                Kb[b].resize(kBatch, static_cast<Eigen::Index>(bref[b].t.size()));
            }
            for (;;) {
                int c = next.fetch_add(1);
                if (c >= chunks) break;
                int j0 = static_cast<int>(static_cast<long long>(Gt) * c / chunks);
                int j1 = static_cast<int>(static_cast<long long>(Gt) * (c + 1) / chunks);
                ChunkResult out = empty_result();
                int batch = 0;
                for (int j = j0; j < j1; ++j) {
                    std::fill(ph.begin(), ph.end(), 0.0);
                    for (const auto& tm : terms) {
                        std::int64_t idx = (tm.stride_t * j) % Gm;
                        for (int i = 0; i < Gs; ++i) {
                            ph[i] += tm.a * cs[idx] + tm.b * sn[idx];
                            idx += tm.stride_s;
                            if (idx >= Gm) idx -= Gm;
                        }
                    }
                    for (int i = 0; i < Gs; ++i) row[i] = cis_turns(ph[i]);
                    fft_s.run(row.data(), row.data());

                    double e = 0.0, es = 0.0;
                    for (int i = 0; i < Gs; ++i) {
                        double a2 = std::norm(row[i]);
                        e += a2;
                        int k = i < Gs / 2 ? i : i - Gs;
                        if (std::abs(k) >= 0.45 * Gs) es += a2;
                    }
                    out.energy += e;
                    out.tail += es;

                    // grid columns: residue-class prefix sums
                    {
                        const auto& b = bounds[0];
                        auto& sp = snap[0];
                        std::fill(R.begin(), R.end(), 0.0);
                        std::size_t bi = 0;
                        while (bi < b.size() && b[bi] < -Gs / 2) {
                            std::fill(sp.begin() + bi * P, sp.begin() + (bi + 1) * P, 0.0);
                            ++bi;
                        }
                        for (std::int64_t k = -Gs / 2; k < Gs / 2 && bi < b.size(); ++k) {
                            R[static_cast<std::size_t>(k & (P - 1))] += row[static_cast<std::size_t>(floor_mod(k, Gs))];
                            while (bi < b.size() && b[bi] == k) {
                                std::copy(R.begin(), R.end(), sp.begin() + bi * P);
                                ++bi;
                            }
                        }
                    }
                    // off-grid columns: direct phase rotation
                    for (int o = 0; o < nOff; ++o) {
                        const auto& b = bounds[1 + o];
                        auto& sp = snap[1 + o];
                        long double x = off_x[o];
                        cplx rot = cis_ld(-static_cast<long double>(Gs / 2) * x);
                        cplx step = cis_ld(x);
                        cplx run = 0.0;
                        std::size_t bi = 0;
                        while (bi < b.size() && b[bi] < -Gs / 2) sp[bi++] = 0.0;
                        for (std::int64_t k = -Gs / 2; k < Gs / 2 && bi < b.size(); ++k) {
                            run += row[static_cast<std::size_t>(floor_mod(k, Gs))] * rot;
                            // renormalise the rotating factor now and then
                            if ((k & 1023) == 0) rot = cis_ld(static_cast<long double>(k + 1) * x);
                            else rot *= step;
                            while (bi < b.size() && b[bi] == k) sp[bi++] = run;
                        }
                    }
                    const double inv_s = 1.0 / Gs;
                    for (std::size_t w = 0; w < skeys.size(); ++w) {
                        const auto& spl = splan[w];
                        if (spl.group == 0) {
                            const cplx* hi = &snap[0][static_cast<std::size_t>(spl.hi) * P];
                            const cplx* lo = &snap[0][static_cast<std::size_t>(spl.lo) * P];
                            int ix = skeys[w].xkey;
                            cplx v = 0.0;
                            for (int r = 0; r < P; ++r) v += (hi[r] - lo[r]) * rootP[(r * ix) & (P - 1)];
                            A[w] = v * inv_s;
                        } else {
                            const auto& sp = snap[spl.group];
                            A[w] = (sp[spl.hi] - sp[spl.lo]) * inv_s;
                        }
                    }
                    for (int ix = 0; ix < P; ++ix)
                        for (std::size_t w = 0; w < nShK; ++w)
                            D[(static_cast<std::size_t>(ix) * nShK + w) * Gt + j] = A[shared_sid[ix * nShK + w]];

                    for (std::size_t w = 0; w < tkeys.size(); ++w) {
                        const auto& tk = tkeys[w];
                        if (tk.ykey < Gt) {
                            std::int64_t m = floor_mod(tk.ykey - j, Gt);
                            if (m == 0) {
                                K[w] = cplx(static_cast<double>(tk.hi - tk.lo + 1) / Gt, 0.0);
                            } else {
                                cplx a = rootT[floor_mod(tk.lo * m, Gt)];
                                cplx b = rootT[floor_mod((tk.hi + 1) * m, Gt)];
                                K[w] = (a - b) * inv_one_minus[m] / static_cast<double>(Gt);
                            }
                        } else {
                            long double theta = off_y[tk.ykey - Gt] - static_cast<long double>(j) / Gt;
                            K[w] = dirichlet_window(tk.lo, tk.hi, theta, Gt);
                        }
                    }
                    for (std::size_t q = 0; q < nq; ++q) {
                        const auto& r = qref[q];
                        if (r.s < 0 || r.t < 0) continue;
                        out.q[q] += A[r.s] * K[r.t];
                    }
                    for (std::size_t b = 0; b < nb; ++b) {
                        const auto& br = bref[b];
                        for (std::size_t i = 0; i < br.s.size(); ++i)
                            Ab[b](batch, static_cast<Eigen::Index>(i)) = br.s[i] < 0 ? cplx(0.0) : A[br.s[i]];
                        for (std::size_t i = 0; i < br.t.size(); ++i)
                            Kb[b](batch, static_cast<Eigen::Index>(i)) = br.t[i] < 0 ? cplx(0.0) : K[br.t[i]];
                    }
                    if (++batch == kBatch || j + 1 == j1) {
                        for (std::size_t b = 0; b < nb; ++b)
                            out.blocks[b].noalias() += Ab[b].topRows(batch).transpose() * Kb[b].topRows(batch);
                        batch = 0;
                    }
                }
                merge(c, std::move(out));
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);

    StreamResult res;
    res.Gs = Gs;
    res.Gt = Gt;
    res.P = P;
    res.query_values.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) res.query_values[q] = std::abs(total.q[q]);
    for (std::size_t b = 0; b < nb; ++b) {
        const CMat& m = total.blocks[b];
        std::vector<double> v(static_cast<std::size_t>(m.rows() * m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index k = 0; k < m.cols(); ++k) v[static_cast<std::size_t>(i * m.cols() + k)] = std::abs(m(i, k));
        res.block_values.push_back(std::move(v));
    }
    const double e = total.energy, es = total.tail;
    const double scale = 1.0 / (static_cast<double>(Gs) * Gs * Gt);
    res.parseval = e * scale;

    // t-direction tail from a subsample of columns
    {
        Fft1d fft_t(Gt, true);
        std::vector<cplx> col(Gt);
        int ncol = std::min(kTailColumns, Gs);
        double et = 0.0;
        for (int c = 0; c < ncol; ++c) {
            int i = static_cast<int>(static_cast<long long>(Gs) * c / ncol);
            for (int j = 0; j < Gt; ++j) {
                double v = 0.0;
                for (const auto& tm : terms) {
                    std::int64_t idx = (tm.stride_s * i + tm.stride_t * j) % Gm;
                    v += tm.a * cs[idx] + tm.b * sn[idx];
                }
                col[j] = cis_turns(v);
            }
            fft_t.run(col.data(), col.data());
            for (int j = 0; j < Gt; ++j) {
                int l = j < Gt / 2 ? j : j - Gt;
                if (std::abs(l) >= 0.45 * Gt) et += std::norm(col[j]);
            }
        }
        et /= static_cast<double>(ncol) * Gt * Gt;
        res.tail_mass = std::sqrt(es * scale + et);
    }

    // shared pairs: transform each stored column sequence over j, then window in l
    res.shared_values.assign(static_cast<std::size_t>(P) * P * plan.shared.size(), 0.0);
    if (!plan.shared.empty() && nShK > 0) {
        std::vector<std::int64_t> lb;
        for (const auto& w : shared_lw) {
            lb.push_back(w.hi);
            lb.push_back(w.lo - 1);
        }
        std::sort(lb.begin(), lb.end());
        lb.erase(std::unique(lb.begin(), lb.end()), lb.end());
        auto lpos = [&](std::int64_t L) {
            return static_cast<int>(std::lower_bound(lb.begin(), lb.end(), L) - lb.begin());
        };
        Fft1d fft_t(Gt, true);
        std::vector<cplx> snapl(lb.size() * P), R(P);
        for (int ix = 0; ix < P; ++ix) {
            for (std::size_t w = 0; w < nShK; ++w) {
                cplx* seq = &D[(static_cast<std::size_t>(ix) * nShK + w) * Gt];
                fft_t.run(seq, seq);
                std::fill(R.begin(), R.end(), 0.0);
                std::size_t bi = 0;
                while (bi < lb.size() && lb[bi] < -Gt / 2) {
                    std::fill(snapl.begin() + bi * P, snapl.begin() + (bi + 1) * P, 0.0);
                    ++bi;
                }
                for (std::int64_t l = -Gt / 2; l < Gt / 2 && bi < lb.size(); ++l) {
                    R[static_cast<std::size_t>(l & (P - 1))] += seq[floor_mod(l, Gt)];
                    while (bi < lb.size() && lb[bi] == l) {
                        std::copy(R.begin(), R.end(), snapl.begin() + bi * P);
                        ++bi;
                    }
                }
                for (std::size_t p = 0; p < plan.shared.size(); ++p) {
                    auto [kw, lw] = shared_idx[p];
                    if (kw != static_cast<int>(w) || lw < 0) continue;
                    const cplx* hi = &snapl[static_cast<std::size_t>(lpos(shared_lw[lw].hi)) * P];
                    const cplx* lo = &snapl[static_cast<std::size_t>(lpos(shared_lw[lw].lo - 1)) * P];
                    for (int iy = 0; iy < P; ++iy) {
                        cplx v = 0.0;
                        for (int r = 0; r < P; ++r) v += (hi[r] - lo[r]) * rootP[(r * iy) & (P - 1)];
                        res.shared_values[(static_cast<std::size_t>(ix) * P + iy) * plan.shared.size() + p] =
                            std::abs(v) / Gt;
                    }
                }
            }
        }
    }
    return res;
}

} // namespace uconv
