#include "wcl/trapped_set.hpp"

#include "wcl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wcl {

namespace {

// M^depth with an overflow guard; cell coordinates must stay below 2^62.
std::uint64_t checked_pow(int M, int depth) {
    std::uint64_t v = 1;
    for (int t = 0; t < depth; ++t) {
        if (v > (std::uint64_t(1) << 62) / std::uint64_t(M))
            throw std::invalid_argument("trapped_set: depth overflows cell coordinates");
        v *= std::uint64_t(M);
    }
    return v;
}

// strip indices of all admissible depth-letter words, in lexicographic order
std::vector<std::uint64_t> admissible_strips(const OpenMapSpec& map, int depth) {
    const std::size_t D = map.kept.size();
    std::vector<std::uint64_t> out;
    std::vector<std::size_t> digit(std::size_t(depth), 0);
    std::uint64_t count = 1;
    for (int t = 0; t < depth; ++t) count *= D;  // bounded by caller's cap check
    out.reserve(count);
    for (;;) {
        std::uint64_t ix = 0;
        for (int t = 0; t < depth; ++t)
            ix = ix * std::uint64_t(map.M) + std::uint64_t(map.kept[digit[std::size_t(t)]]);
        out.push_back(ix);
        int t = depth - 1;
        while (t >= 0 && ++digit[std::size_t(t)] == D) digit[std::size_t(t--)] = 0;
        if (t < 0) break;
    }
    return out;
}

} // namespace

TrappedSetSample trapped_set_sample(const OpenMapSpec& map, int depth,
                                    TrapDirection direction, std::uint64_t cap) {
    map.validate();
    if (depth < 1) throw std::invalid_argument("trapped_set_sample: depth must be >= 1");
    checked_pow(map.M, depth);

    const std::uint64_t D = std::uint64_t(map.kept.size());
    std::uint64_t count = 1;
    const int words = (direction == TrapDirection::full) ? 2 * depth : depth;
    for (int t = 0; t < words; ++t) {
        if (count > cap / D)
            throw capacity_error("trapped_set_sample: cell count would exceed cap of "
                                 + std::to_string(cap));
        count *= D;
    }
    if (count > cap)
        throw capacity_error("trapped_set_sample: cell count would exceed cap of "
                             + std::to_string(cap));

    const std::vector<std::uint64_t> strips = admissible_strips(map, depth);
    TrappedSetSample s;
    s.map = map;
    s.depth = depth;
    s.direction = direction;
    s.cells.reserve(count);
    switch (direction) {
    case TrapDirection::forward:
        for (std::uint64_t ix : strips) s.cells.push_back({ix, 0});
        break;
    case TrapDirection::backward:
        for (std::uint64_t iy : strips) s.cells.push_back({0, iy});
        break;
    case TrapDirection::full:
        for (std::uint64_t ix : strips)
            for (std::uint64_t iy : strips) s.cells.push_back({ix, iy});
        break;
    }
    return s;
}

std::uint64_t coarse_cell_count(const TrappedSetSample& sample, int depth) {
    if (depth < 1 || depth > sample.depth)
        throw std::invalid_argument("coarse_cell_count: depth outside the sample");
    const std::uint64_t div = checked_pow(sample.map.M, sample.depth - depth);
    std::vector<std::array<std::uint64_t, 2>> keys;
    keys.reserve(sample.cells.size());
    for (const auto& c : sample.cells) keys.push_back({c[0] / div, c[1] / div});
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys.size();
}

DimensionEstimate box_dimension(const TrappedSetSample& sample, int depth_min,
                                int depth_max) {
    if (depth_min < 1 || depth_max > sample.depth || depth_min > depth_max)
        throw std::invalid_argument("box_dimension: depth range outside the sample");
    if (depth_max - depth_min < 2)
        throw std::invalid_argument("box_dimension: fit degenerate, need at least 3 depths");

    const double logM = std::log(double(sample.map.M));
    DimensionEstimate est;
    std::vector<double> xs, ys;
    for (int m = depth_min; m <= depth_max; ++m) {
        const double cnt = double(coarse_cell_count(sample, m));
        est.points.push_back({-double(m) * logM, std::log(cnt)});
        xs.push_back(double(m) * logM);  // log(1/cell size)
        ys.push_back(std::log(cnt));
    }
    est.fit = fit_line(xs, ys);
    est.dimension = est.fit.slope;
    return est;
}

} // namespace wcl
