#pragma once

#include <cstdint>
#include <map>

namespace uconv {

// Derivative multi-index (b1, b2), |b| >= 1. Variable X_j stands for D^{beta_j} L.
struct Beta {
    int b1 = 0;
    int b2 = 0;
    int order() const { return b1 + b2; }
    bool operator==(const Beta&) const = default;
};

// Sparse exponent vector: variable index -> exponent (> 0).
using Alpha = std::map<int, int>;

// Enumeration by blocks of equal |beta|; inside a block b1 decreases.
Beta beta_of(std::int64_t j);
std::int64_t index_of(const Beta& b);

std::int64_t h_weight(const Alpha& a);
std::int64_t w_weight(const Alpha& a);

Alpha alpha_add(const Alpha& x, const Alpha& y);

} // namespace uconv
