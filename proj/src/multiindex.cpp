#include "uconv/multiindex.hpp"

#include "uconv/errors.hpp"

#include <cmath>

namespace uconv {

Beta beta_of(std::int64_t j) {
    if (j < 1) throw RangeError("beta index must be >= 1");
    // block n holds n(n-1)/2 <= j < n(n+1)/2
    auto n = static_cast<std::int64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(j))) / 2.0);
    while (n * (n - 1) / 2 > j) --n;
    while (n * (n + 1) / 2 <= j) ++n;
    return Beta{static_cast<int>((n - 1) * (n + 2) / 2 - j), static_cast<int>(j - n * (n - 1) / 2)};
}

std::int64_t index_of(const Beta& b) {
    if (b.b1 < 0 || b.b2 < 0 || b.order() < 1) throw RangeError("beta must satisfy |beta| >= 1");
    std::int64_t n = b.order() + 1;
    return n * (n - 1) / 2 + b.b2;
}

std::int64_t h_weight(const Alpha& a) {
    std::int64_t h = 0;
    for (const auto& [u, e] : a) h += static_cast<std::int64_t>(e) * beta_of(u).order();
    return h;
}

std::int64_t w_weight(const Alpha& a) {
    std::int64_t w = 0;
    for (const auto& [u, e] : a) w += static_cast<std::int64_t>(e) * (beta_of(u).b1 + 1);
    return w;
}

Alpha alpha_add(const Alpha& x, const Alpha& y) {
    Alpha r = x;
    for (const auto& [u, e] : y) {
        if (e == 0) continue;
        r[u] += e;
    }
    return r;
}

} // namespace uconv
