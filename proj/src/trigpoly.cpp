#include "uconv/trigpoly.hpp"

#include "uconv/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace uconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool canonical(const Freq& m) {
    if (m[0] != 0) return m[0] > 0;
    return m[1] >= 0;
}

// cos and sin of 2 pi theta with the integer part removed first
void cis2pi(double theta, double& c, double& s) {
    double r = theta - std::nearbyint(theta);
    c = std::cos(kTwoPi * r);
    s = std::sin(kTwoPi * r);
}

} // namespace

TrigPoly::TrigPoly(int dim) : dim_(dim) {
    if (dim != 1 && dim != 2) throw DimMismatch("TrigPoly dim must be 1 or 2");
}

void TrigPoly::add(Freq m, double a, double b) {
    if (dim_ == 1 && m[1] != 0) throw DimMismatch("dim-1 polynomial with a second frequency");
    if (!canonical(m)) {
        m = {-m[0], -m[1]};
        b = -b;
    }
    if (m[0] == 0 && m[1] == 0) b = 0.0;
    if (a == 0.0 && b == 0.0) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, Amp{a, b});
        return;
    }
    it->second.a += a;
    it->second.b += b;
    if (it->second.a == 0.0 && it->second.b == 0.0) terms_.erase(it);
}

TrigPoly TrigPoly::constant(double c, int dim) {
    TrigPoly p(dim);
    p.add(Freq{0, 0}, c, 0.0);
    return p;
}

TrigPoly TrigPoly::cos_term(Freq m, double amp, int dim) {
    TrigPoly p(dim);
    p.add(m, amp, 0.0);
    return p;
}

TrigPoly TrigPoly::sin_term(Freq m, double amp, int dim) {
    TrigPoly p(dim);
    p.add(m, 0.0, amp);
    return p;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
    if (dim_ != o.dim_) throw DimMismatch("adding polynomials of different dim");
    TrigPoly r = *this;
    for (const auto& [m, v] : o.terms_) r.add(m, v.a, v.b);
    return r;
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const { return *this + o * -1.0; }

TrigPoly TrigPoly::operator*(double c) const {
    TrigPoly r(dim_);
    for (const auto& [m, v] : terms_) r.add(m, c * v.a, c * v.b);
    return r;
}

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
    if (dim_ != o.dim_) throw DimMismatch("multiplying polynomials of different dim");
    TrigPoly r(dim_);
    for (const auto& [m, u] : terms_) {
        for (const auto& [n, v] : o.terms_) {
            Freq sum{m[0] + n[0], m[1] + n[1]};
            Freq diff{m[0] - n[0], m[1] - n[1]};
            r.add(sum, 0.5 * (u.a * v.a - u.b * v.b), 0.5 * (u.a * v.b + u.b * v.a));
            r.add(diff, 0.5 * (u.a * v.a + u.b * v.b), 0.5 * (u.b * v.a - u.a * v.b));
        }
    }
    return r;
}

bool TrigPoly::operator==(const TrigPoly& o) const {
    if (dim_ != o.dim_ || terms_.size() != o.terms_.size()) return false;
    auto it = o.terms_.begin();
    for (const auto& [m, v] : terms_) {
        if (m != it->first || v.a != it->second.a || v.b != it->second.b) return false;
        ++it;
    }
    return true;
}

double TrigPoly::coeff_sum() const {
    double s = 0.0;
    for (const auto& [m, v] : terms_) s += std::abs(v.a) + std::abs(v.b);
    return s;
}

std::int64_t TrigPoly::max_freq(int axis) const {
    std::int64_t r = 0;
    for (const auto& [m, v] : terms_) r = std::max<std::int64_t>(r, std::llabs(m[axis]));
    return r;
}

TrigPoly TrigPoly::compose_linear(std::int64_t p, std::int64_t q) const {
    if (dim_ != 1) throw DimMismatch("compose_linear expects a dim-1 polynomial");
    TrigPoly r(2);
    for (const auto& [m, v] : terms_) r.add(Freq{m[0] * p, m[0] * q}, v.a, v.b);
    return r;
}

TrigPoly derive(const TrigPoly& p, int k, int l) {
    if (k < 0 || l < 0) throw RangeError("negative derivative order");
    if (k + l > kMaxDeriveOrder) throw OrderTooLarge("derivative order exceeds 64");
    if (p.dim() == 1) {
        k += l;
        l = 0;
    }
    int q = (k + l) % 4;
    TrigPoly r(p.dim());
    for (const auto& [m, v] : p.terms()) {
        double f = std::pow(kTwoPi * static_cast<double>(m[0]), k) *
                   std::pow(kTwoPi * static_cast<double>(m[1]), l);
        if (f == 0.0) continue;
        // each derivative maps (a, b) -> omega (b, -a)
        double a = v.a, b = v.b;
        for (int i = 0; i < q; ++i) {
            double na = b, nb = -a;
            a = na;
            b = nb;
        }
        r.add(m, f * a, f * b);
    }
    return r;
}

double eval(const TrigPoly& p, double s, double t) {
    double acc = 0.0;
    for (const auto& [m, v] : p.terms()) {
        double th = static_cast<double>(m[0]) * s;
        th -= std::nearbyint(th);
        double th2 = static_cast<double>(m[1]) * t;
        th2 -= std::nearbyint(th2);
        double c, sn;
        cis2pi(th + th2, c, sn);
        acc += v.a * c + v.b * sn;
    }
    return acc;
}

double c2_norm(const TrigPoly& p) {
    if (p.dim() != 2) throw DimMismatch("c2_norm needs a dim-2 polynomial");
    if (p.is_zero()) return 0.0;
    std::vector<TrigPoly> ders;
    for (int k = 0; k <= 2; ++k)
        for (int l = 0; k + l <= 2; ++l) ders.push_back(derive(p, k, l));
    double b3 = 0.0;
    // gradient bound for every derivative of order <= 2
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; k + l <= 3; ++l)
            if (k + l >= 1) b3 = std::max(b3, derive(p, k, l).coeff_sum());

    for (int g = 256;; g *= 2) {
        std::vector<double> cs(g), sn(g);
        for (int i = 0; i < g; ++i) {
            cs[i] = std::cos(kTwoPi * i / g);
            sn[i] = std::sin(kTwoPi * i / g);
        }
        double sup = 0.0;
        for (const auto& d : ders) {
            for (int i = 0; i < g; ++i) {
                for (int j = 0; j < g; ++j) {
                    double acc = 0.0;
                    for (const auto& [m, v] : d.terms()) {
                        std::int64_t idx = (m[0] * i + m[1] * j) % g;
                        if (idx < 0) idx += g;
                        acc += v.a * cs[idx] + v.b * sn[idx];
                    }
                    sup = std::max(sup, std::abs(acc));
                }
            }
        }
        // any point is within h/2 of a node in each coordinate
        double h = 1.0 / g;
        double slack = b3 * h;
        if (slack <= 0.005 * sup || g >= 2048) return sup + slack;
    }
}

Direction::Direction(std::vector<double> w) : omega(std::move(w)) {
    double n2 = 0.0;
    for (double x : omega) n2 += x * x;
    if (omega.empty() || std::abs(std::sqrt(n2) - 1.0) > 1e-12)
        throw RangeError("direction must be a unit vector");
}

void PhaseFamily::validate() const {
    if (components.empty()) throw DimMismatch("phase family needs d >= 1 components");
    if (lattice.size() != components.size()) throw DimMismatch("lattice rows must match d");
    for (const auto& c : components)
        if (c.dim() != 2) throw DimMismatch("phase components must be dim 2");
}

TrigPoly contract(const PhaseFamily& f, const Direction& omega) {
    if (omega.size() != f.d()) throw DimMismatch("direction dimension differs from d");
    TrigPoly r(2);
    for (std::size_t j = 0; j < f.d(); ++j) r = r + f.components[j] * omega.omega[j];
    return r;
}

std::array<double, 2> contract_lattice(const PhaseFamily& f, const Direction& omega) {
    if (omega.size() != f.d()) throw DimMismatch("direction dimension differs from d");
    std::array<double, 2> r{0.0, 0.0};
    for (std::size_t j = 0; j < f.d(); ++j) {
        r[0] += omega.omega[j] * static_cast<double>(f.lattice[j][0]);
        r[1] += omega.omega[j] * static_cast<double>(f.lattice[j][1]);
    }
    return r;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string to_text(const TrigPoly& p) {
    std::string out;
    for (const auto& [m, v] : p.terms()) {
        out += std::to_string(m[0]) + ' ' + std::to_string(m[1]) + ' ' + format_double(v.a) +
               ' ' + format_double(v.b) + '\n';
    }
    return out;
}

TrigPoly parse_text(const std::string& text, int dim) {
    TrigPoly p(dim);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string f0, f1, fa, fb;
        if (!(ls >> f0 >> f1 >> fa >> fb))
            throw ConfigError("trig text line " + std::to_string(lineno) + ": expected 'm1 m2 a b'");
        std::int64_t m0 = 0, m1 = 0;
        double a = 0.0, b = 0.0;
        auto bad = [&](const std::string& s, auto& v) {
            auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            return r.ec != std::errc{} || r.ptr != s.data() + s.size();
        };
        if (bad(f0, m0) || bad(f1, m1) || bad(fa, a) || bad(fb, b))
            throw ConfigError("trig text line " + std::to_string(lineno) + ": malformed number");
        p.add(Freq{m0, m1}, a, b);
    }
    return p;
}

} // namespace uconv
