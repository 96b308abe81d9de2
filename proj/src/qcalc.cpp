#include "uconv/qcalc.hpp"

#include "uconv/errors.hpp"
#include "uconv/oscint.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace uconv {

namespace {

mpz_class binom(int n, int k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

// d_t^v L as a polynomial (v = 0 gives L)
QPolynomial dt_L(int v) { return QPolynomial::dvar(Beta{0, v}); }

void check_klj(int k, int l, int j) {
    if (k < 1 || l < 1) throw RangeError("Q^{k,l}_j needs k, l >= 1");
    if (j < 2 || j > k + l) throw RangeError("Q^{k,l}_j needs 2 <= j <= k + l");
    if (k + l > kMaxQDepth) throw DepthTooLarge("k + l exceeds the construction guard 12");
}

std::string label(int k, int l, int j) {
    std::ostringstream o;
    o << "(" << k << "," << l << "," << j << ")";
    return o.str();
}

} // namespace

QPolynomial QPolynomial::L_pow(int p) {
    QPolynomial q;
    q.add(Mono{p, {}}, 1);
    return q;
}

QPolynomial QPolynomial::var(int u) {
    QPolynomial q;
    q.add(Mono{0, Alpha{{u, 1}}}, 1);
    return q;
}

QPolynomial QPolynomial::dvar(const Beta& b) {
    if (b.order() == 0) return L_pow(1);
    return var(static_cast<int>(index_of(b)));
}

void QPolynomial::add(const Mono& m, const mpz_class& c) {
    if (c == 0) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
}

QPolynomial QPolynomial::operator+(const QPolynomial& o) const {
    QPolynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add(m, c);
    return r;
}

QPolynomial QPolynomial::operator*(const QPolynomial& o) const {
    QPolynomial r;
    for (const auto& [m1, c1] : terms_)
        for (const auto& [m2, c2] : o.terms_)
            r.add(Mono{m1.lpow + m2.lpow, alpha_add(m1.alpha, m2.alpha)}, c1 * c2);
    return r;
}

QPolynomial QPolynomial::operator*(const mpz_class& c) const {
    QPolynomial r;
    for (const auto& [m, v] : terms_) r.add(m, v * c);
    return r;
}

mpz_class QPolynomial::coeff(const Mono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? mpz_class(0) : it->second;
}

std::string QPolynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream o;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) o << (c > 0 ? " + " : " - ");
        else if (c < 0) o << "-";
        first = false;
        mpz_class ac = abs(c);
        bool bare = true;
        if (ac != 1) {
            o << ac.get_str();
            bare = false;
        }
        auto sep = [&] {
            if (!bare) o << "*";
            bare = false;
        };
        if (m.lpow > 0) {
            sep();
            o << "L";
            if (m.lpow > 1) o << "^" << m.lpow;
        }
        for (const auto& [u, e] : m.alpha) {
            sep();
            o << "X" << u;
            if (e > 1) o << "^" << e;
        }
        if (bare) o << "1";
    }
    return o.str();
}

QPolynomial formal_derive(const QPolynomial& q, Axis axis) {
    const int step_s = axis == Axis::s ? 1 : 0;
    const int step_t = axis == Axis::t ? 1 : 0;
    QPolynomial r;
    for (const auto& [m, c] : q.terms()) {
        if (m.lpow > 0) {
            Mono nm{m.lpow - 1, alpha_add(m.alpha, Alpha{{axis == Axis::s ? 1 : 2, 1}})};
            r.add(nm, c * m.lpow);
        }
        for (const auto& [u, e] : m.alpha) {
            Beta b = beta_of(u);
            int nu = static_cast<int>(index_of(Beta{b.b1 + step_s, b.b2 + step_t}));
            Alpha na = m.alpha;
            if (--na[u] == 0) na.erase(u);
            na[nu] += 1;
            r.add(Mono{m.lpow, na}, c * e);
        }
    }
    return r;
}

QPolynomial substitute_zero(const QPolynomial& q, bool zero_L, int max_order) {
    QPolynomial r;
    for (const auto& [m, c] : q.terms()) {
        if (zero_L && m.lpow > 0) continue;
        bool killed = false;
        for (const auto& [u, e] : m.alpha)
            if (beta_of(u).order() <= max_order) {
                killed = true;
                break;
            }
        if (!killed) r.add(m, c);
    }
    return r;
}

double eval_at_L(const QPolynomial& q, double l) {
    double acc = 0.0;
    for (const auto& [m, c] : q.terms()) {
        if (!m.alpha.empty()) continue;
        acc += c.get_d() * std::pow(l, m.lpow);
    }
    return acc;
}

QPolynomial mirror(const QPolynomial& q) {
    QPolynomial r;
    for (const auto& [m, c] : q.terms()) {
        Alpha na;
        for (const auto& [u, e] : m.alpha) {
            Beta b = beta_of(u);
            na[static_cast<int>(index_of(Beta{b.b2, b.b1}))] += e;
        }
        r.add(Mono{m.lpow, na}, c);
    }
    return r;
}

const QPolynomial& QTable::get(int k, int l, int j) {
    check_klj(k, l, j);
    auto key = std::make_tuple(k, l, j);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (frozen_) throw RangeError("QTable is frozen; entry " + label(k, l, j) + " not built");
    QPolynomial q = build(k, l, j);
    return cache_.emplace(key, std::move(q)).first->second;
}

QPolynomial QTable::build(int k, int l, int j) {
    if (l == 1) {
        if (k == 1) return QPolynomial::L_pow(1);
        QPolynomial q;
        if (j <= k) q = formal_derive(get(k - 1, 1, j), Axis::s);
        for (int r = std::max(2, j - 1); r <= k; ++r)
            q = q + get(k - 1, 1, r) * dt_L(r + 1 - j) * binom(r - 1, j - 2);
        return q;
    }
    QPolynomial q;
    if (j <= k + l - 1) q = formal_derive(get(k, l - 1, j), Axis::t);
    if (j >= 3) q = q + get(k, l - 1, j - 1);
    return q;
}

QPolynomial QTable::get_mirror(int k, int l, int j) { return mirror(get(l, k, j)); }

QPolynomial build_q(QTable& table, int k, int l, int j) { return table.get(k, l, j); }

CheckReport check_homogeneity(QTable& t, int k, int l, int j) {
    CheckReport rep;
    rep.check = "homogeneity";
    const QPolynomial& q = t.get(k, l, j);
    rep.checked = 1;
    for (const auto& [m, c] : q.terms()) {
        std::int64_t r = k - m.lpow;
        std::int64_t w = w_weight(m.alpha), h = h_weight(m.alpha);
        if (r < 0 || w != r || h != k + l - j) {
            std::ostringstream o;
            o << label(k, l, j) << ": monomial L^" << m.lpow << " with w=" << w << " h=" << h
              << " (want w=" << r << " h=" << (k + l - j) << ")";
            rep.violations.push_back(o.str());
        }
    }
    if (rep.violations.empty()) rep.passed = 1;
    return rep;
}

CheckReport check_positivity(QTable& t, int k, int l, int j) {
    if (j < 2 || j > l + 1) throw RangeError("positivity needs 2 <= j <= l + 1");
    CheckReport rep;
    rep.check = "positivity";
    const QPolynomial& q = t.get(k, l, j);
    Beta b{k - 1, l + 1 - j};
    Mono target = b.order() == 0 ? Mono{1, {}} : Mono{0, Alpha{{static_cast<int>(index_of(b)), 1}}};
    mpz_class c = q.coeff(target);
    rep.checked = 1;
    if (c > 0) {
        rep.passed = 1;
    } else {
        rep.violations.push_back(label(k, l, j) + ": designated coefficient " + c.get_str());
    }
    return rep;
}

CheckReport check_vanishing_pattern(QTable& t, int k, int l, int mu) {
    if (k + l > 10) throw DepthTooLarge("vanishing check needs k + l <= 10");
    if (mu < 0 || mu > 20) throw RangeError("mu out of range");
    CheckReport rep;
    rep.check = "vanishing";
    const int cut = 2 * ((1 << mu) - 1);
    const long scale = 1L << (mu + 1);
    for (int j = 2; j <= k + l; ++j) {
        // j > l + k / 2^{mu+1}
        if (static_cast<long>(j) * scale <= static_cast<long>(l) * scale + k) continue;
        ++rep.checked;
        QPolynomial z = substitute_zero(t.get(k, l, j), true, cut);
        if (z.is_zero()) {
            ++rep.passed;
        } else {
            rep.violations.push_back(label(k, l, j) + " mu=" + std::to_string(mu) + ": " + z.str());
        }
    }
    return rep;
}

CheckReport check_single_monomial(QTable& t, int m, int r, int k) {
    CheckReport rep;
    rep.check = "single_monomial";
    const int l = m + r - k;
    if (k < 1 || l < 1) throw RangeError("single-monomial check needs k >= 1 and m + r - k >= 1");
    QPolynomial q = t.get(k, l, m);
    QPolynomial z = r >= 1 ? substitute_zero(q, true, r - 1) : q;
    Beta b{k - 1, r - k + 1};
    Mono target = b.order() == 0 ? Mono{1, {}} : Mono{0, Alpha{{static_cast<int>(index_of(b)), 1}}};
    rep.checked = 1;
    std::ostringstream o;
    o << "m=" << m << " r=" << r << " k=" << k << ": ";
    if (z.size() == 1 && z.terms().begin()->first == target && z.terms().begin()->second > 0) {
        rep.passed = 1;
    } else {
        rep.violations.push_back(o.str() + z.str());
    }
    return rep;
}

double composite_scale(const TrigPoly& f, std::int64_t a, std::int64_t b, int k, int l, double s,
                       double tt) {
    TrigPoly psi = f.compose_linear(a, b);
    return 1.0 + std::abs(eval(derive(psi, k, l), s, tt));
}

double verify_identity_on_composite(QTable& t, const TrigPoly& f, std::int64_t a, std::int64_t b,
                                    int k, int l, double s, double tt) {
    if (f.dim() != 1) throw DimMismatch("composite identity expects a dim-1 profile");
    if (b == 0) throw RangeError("composite identity needs b != 0");
    if (k < 1 || l < 1 || k + l > 10) throw RangeError("composite identity needs k, l >= 1, k + l <= 10");
    TrigPoly psi = f.compose_linear(a, b);
    double lhs = eval(derive(psi, k, l), s, tt);
    double L = static_cast<double>(a) / static_cast<double>(b);
    double rhs = 0.0;
    for (int j = 2; j <= k + l; ++j) rhs += eval_at_L(t.get(k, l, j), L) * eval(derive(psi, 0, j), s, tt);
    return std::abs(lhs - rhs);
}

CheckReport sweep_checks(QTable& t, const std::string& which, int depth) {
    CheckReport total;
    total.check = which;
    auto merge = [&](const CheckReport& r) {
        total.checked += r.checked;
        total.passed += r.passed;
        total.violations.insert(total.violations.end(), r.violations.begin(), r.violations.end());
    };
    for (int n = 2; n <= depth; ++n) {
        for (int k = 1; k < n; ++k) {
            int l = n - k;
            if (which == "homogeneity") {
                for (int j = 2; j <= k + l; ++j) merge(check_homogeneity(t, k, l, j));
            } else if (which == "positivity") {
                for (int j = 2; j <= l + 1; ++j) merge(check_positivity(t, k, l, j));
            } else if (which == "vanishing") {
                for (int mu = 0; mu <= 1; ++mu) merge(check_vanishing_pattern(t, k, l, mu));
            } else if (which == "top") {
                CheckReport r{"top", 1, 0, {}};
                if (t.get(k, l, k + l) == QPolynomial::L_pow(k)) r.passed = 1;
                else r.violations.push_back(label(k, l, k + l) + ": top coefficient is not L^k");
                merge(r);
            } else if (which == "identity") {
                std::mt19937_64 rng(static_cast<std::uint64_t>(1000 * k + l));
                std::uniform_int_distribution<int> ai(-3, 3), bi(1, 3), fi(1, 3);
                std::uniform_real_distribution<double> pt(0.0, 1.0), amp(-1.0, 1.0);
                TrigPoly f(1);
                int nf = fi(rng);
                for (int i = 0; i < nf; ++i) f.add(fi(rng), amp(rng), amp(rng));
                std::int64_t a = ai(rng), b = bi(rng) * (pt(rng) < 0.5 ? -1 : 1);
                double s = pt(rng), tt = pt(rng);
                double res = verify_identity_on_composite(t, f, a, b, k, l, s, tt);
                double sc = composite_scale(f, a, b, k, l, s, tt);
                CheckReport r{"identity", 1, 0, {}};
                if (res <= 1e-9 * sc) r.passed = 1;
                else r.violations.push_back(label(k, l, 0) + ": residual " + std::to_string(res));
                merge(r);
            } else {
                throw ConfigError("unknown check '" + which + "'");
            }
        }
    }
    return total;
}

CheckReport identity_draws(QTable& t, int draws, std::uint64_t seed, int depth) {
    if (depth < 2 || depth > 10) throw RangeError("identity draws need 2 <= depth <= 10");
    CheckReport total;
    total.check = "identity";
    std::mt19937_64 rng(seed);
    for (int d = 0; d < draws; ++d) {
        // draw k + l <= depth uniformly over admissible pairs
        int k = 0, l = 0;
        do {
            k = 1 + static_cast<int>(unit_double(rng()) * (depth - 1));
            l = 1 + static_cast<int>(unit_double(rng()) * (depth - 1));
        } while (k + l > depth);
        TrigPoly f(1);
        int nf = 1 + static_cast<int>(unit_double(rng()) * 3);
        for (int i = 0; i < nf; ++i) {
            std::int64_t m = 1 + static_cast<std::int64_t>(unit_double(rng()) * 3);
            f.add(m, 2.0 * unit_double(rng()) - 1.0, 2.0 * unit_double(rng()) - 1.0);
        }
        std::int64_t a = static_cast<std::int64_t>(unit_double(rng()) * 7) - 3;
        std::int64_t b = (1 + static_cast<std::int64_t>(unit_double(rng()) * 3)) * ((rng() >> 63) ? -1 : 1);
        double s = unit_double(rng()), tt = unit_double(rng());
        double res = verify_identity_on_composite(t, f, a, b, k, l, s, tt);
        double sc = composite_scale(f, a, b, k, l, s, tt);
        ++total.checked;
        if (res <= 1e-9 * sc) {
            ++total.passed;
        } else {
            total.violations.push_back(label(k, l, 0) + " a=" + std::to_string(a) + " b=" + std::to_string(b) +
                                       ": residual " + std::to_string(res));
        }
    }
    return total;
}

} // namespace uconv
