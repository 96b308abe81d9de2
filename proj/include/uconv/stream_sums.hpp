#pragma once

#include "uconv/character.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace uconv {

struct StreamPoint {
    double x = 0.0;
    double y = 0.0;
};

struct StreamQuery {
    int point = 0;  // index into StreamPlan::points
    std::int64_t M = 0;
    std::int64_t N = 0;
};

// All pairs Ms x Ns at one point.
struct StreamBlock {
    int point = 0;
    std::vector<std::int64_t> Ms;
    std::vector<std::int64_t> Ns;
};

// Rectangular partial sums of a character too large to hold in memory.
// Rows t_j are generated and transformed one at a time; nothing of size Gs x Gt is stored.
struct StreamPlan {
    int P = 16;  // shared pairs are evaluated on the (i/P, j/P) grid
    std::vector<std::pair<std::int64_t, std::int64_t>> shared;
    std::vector<StreamPoint> points;
    std::vector<StreamQuery> queries;
    std::vector<StreamBlock> blocks;
};

struct StreamResult {
    int Gs = 0, Gt = 0, P = 0;
    // |S| for shared pairs: index (ix * P + iy) * shared.size() + pair
    std::vector<double> shared_values;
    std::vector<double> query_values;
    // per block: |S| at index i * Ns.size() + k
    std::vector<std::vector<double>> block_values;
    double parseval = 0.0;
    double tail_mass = 0.0;
};

StreamResult stream_partial_sums(const CharacterSpec& spec, int Gs, int Gt, const StreamPlan& plan,
                                 int jobs = 1);

} // namespace uconv
