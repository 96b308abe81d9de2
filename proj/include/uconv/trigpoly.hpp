#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace uconv {

using Freq = std::array<std::int64_t, 2>;

struct Amp {
    double a = 0.0;  // cosine amplitude
    double b = 0.0;  // sine amplitude
};

// Real trigonometric polynomial on T^1 or T^2:
//   p(x) = sum_m a_m cos(2 pi m.x) + b_m sin(2 pi m.x)
// Keys are canonical (first nonzero entry positive). For dim 1 the
// second frequency entry is always 0.
class TrigPoly {
public:
    explicit TrigPoly(int dim = 2);

    int dim() const { return dim_; }
    const std::map<Freq, Amp>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    // Adds a cos/sin pair at frequency m, folding -m onto m.
    void add(Freq m, double a, double b);
    void add(std::int64_t m, double a, double b) { add(Freq{m, 0}, a, b); }

    static TrigPoly constant(double c, int dim = 2);
    static TrigPoly cos_term(Freq m, double amp = 1.0, int dim = 2);
    static TrigPoly sin_term(Freq m, double amp = 1.0, int dim = 2);

    TrigPoly operator+(const TrigPoly& o) const;
    TrigPoly operator-(const TrigPoly& o) const;
    TrigPoly operator*(double c) const;
    // Product of polynomials via product-to-sum identities.
    TrigPoly operator*(const TrigPoly& o) const;
    bool operator==(const TrigPoly& o) const;

    // sum |a_m| + |b_m|
    double coeff_sum() const;
    // max |m_i| over the support, per axis
    std::int64_t max_freq(int axis) const;

    // Embeds a dim-1 polynomial in T^2 along frequency direction (p, q),
    // i.e. returns t -> f(p s + q t).
    TrigPoly compose_linear(std::int64_t p, std::int64_t q) const;

private:
    int dim_;
    std::map<Freq, Amp> terms_;
};

inline constexpr int kMaxDeriveOrder = 64;

// d^{k+l}/ds^k dt^l. For dim 1 the single variable receives order k+l.
TrigPoly derive(const TrigPoly& p, int k, int l);
double eval(const TrigPoly& p, double s, double t = 0.0);
// Upper bound on max_{|alpha|<=2} sup |D^alpha p| (dim 2 only).
double c2_norm(const TrigPoly& p);

struct Direction {
    std::vector<double> omega;
    explicit Direction(std::vector<double> w);
    std::size_t size() const { return omega.size(); }
};

struct PhaseFamily {
    std::string name;
    std::vector<TrigPoly> components;
    std::vector<std::array<std::int64_t, 2>> lattice;

    std::size_t d() const { return components.size(); }
    void validate() const;
};

TrigPoly contract(const PhaseFamily& f, const Direction& omega);
// (omega.L1, omega.L2)
std::array<double, 2> contract_lattice(const PhaseFamily& f, const Direction& omega);

// Text format: one term per line, "m1 m2 a b". Lines starting with '#' are skipped.
std::string to_text(const TrigPoly& p);
TrigPoly parse_text(const std::string& text, int dim = 2);

std::string format_double(double x);

} // namespace uconv
