#pragma once

#include "uconv/multiindex.hpp"
#include "uconv/trigpoly.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace uconv {

struct Mono {
    int lpow = 0;
    Alpha alpha;
    auto operator<=>(const Mono&) const = default;
};

// Integer polynomial in L and X_1, X_2, ... (X_u = D^{beta_u} L).
class QPolynomial {
public:
    QPolynomial() = default;
    static QPolynomial L_pow(int p);
    static QPolynomial var(int u);
    static QPolynomial dvar(const Beta& b);  // D^b L; b = (0,0) gives L

    const std::map<Mono, mpz_class>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    void add(const Mono& m, const mpz_class& c);
    QPolynomial operator+(const QPolynomial& o) const;
    QPolynomial operator*(const QPolynomial& o) const;
    QPolynomial operator*(const mpz_class& c) const;
    bool operator==(const QPolynomial& o) const { return terms_ == o.terms_; }

    mpz_class coeff(const Mono& m) const;
    std::string str() const;

private:
    std::map<Mono, mpz_class> terms_;
};

enum class Axis { s, t };

QPolynomial formal_derive(const QPolynomial& q, Axis axis);

// Sets L = 0 (if zero_L) and X_u = 0 whenever |beta_u| <= max_order.
QPolynomial substitute_zero(const QPolynomial& q, bool zero_L, int max_order);

// Value at L = l with every X_u = 0.
double eval_at_L(const QPolynomial& q, double l);

// Relabels X_u with beta = (a, b) to the variable with beta = (b, a); used for R^{k,l}_j.
QPolynomial mirror(const QPolynomial& q);

inline constexpr int kMaxQDepth = 12;

// Memoised Q^{k,l}_j. Not thread-safe while building; freeze() before sharing.
class QTable {
public:
    const QPolynomial& get(int k, int l, int j);
    // R^{k,l}_j from Q^{l,k}_j via the s <-> t swap
    QPolynomial get_mirror(int k, int l, int j);
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    std::size_t cached() const { return cache_.size(); }

private:
    QPolynomial build(int k, int l, int j);
    std::map<std::tuple<int, int, int>, QPolynomial> cache_;
    bool frozen_ = false;
};

QPolynomial build_q(QTable& table, int k, int l, int j);

struct CheckReport {
    std::string check;
    long checked = 0;
    long passed = 0;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty() && checked == passed; }
};

CheckReport check_homogeneity(QTable& t, int k, int l, int j);
CheckReport check_positivity(QTable& t, int k, int l, int j);
CheckReport check_vanishing_pattern(QTable& t, int k, int l, int mu);
// Single-monomial survival after substituting X_u = 0 for |beta_u| <= r - 1 (and L when r >= 1).
CheckReport check_single_monomial(QTable& t, int m, int r, int k);

// |d^{k,l} psi - sum_j Q^{k,l}_j(L = a/b, X = 0) d_t^j psi| for psi(s,t) = f(a s + b t).
double verify_identity_on_composite(QTable& t, const TrigPoly& f, std::int64_t a, std::int64_t b,
                                    int k, int l, double s, double tt);
// Same comparison scale: 1 + |d^{k,l} psi|.
double composite_scale(const TrigPoly& f, std::int64_t a, std::int64_t b, int k, int l, double s,
                       double tt);

// Runs a named check over every admissible (k, l, j) with k + l <= depth.
CheckReport sweep_checks(QTable& t, const std::string& which, int depth);
// Random (f, a, b, k, l, point) draws with k + l <= depth.
CheckReport identity_draws(QTable& t, int draws, std::uint64_t seed, int depth);

} // namespace uconv
