#ifndef WCL_TRAPPED_SET_HPP
#define WCL_TRAPPED_SET_HPP

// Cylinder-set samples of the trapped sets of an open baker map and the
// box-counting dimension estimated from them.
//
// The forward trapped set consists of points never absorbed in forward
// time: their x-expansion in base M uses only kept digits, so at depth n
// it is covered by exactly D^n vertical strips of width M^-n.  Backward
// trapping constrains the y-expansion the same way, and the full trapped
// set is the product, D^(2n) squares.  Counts here are exact, which makes
// the dimension fit reproduce log D / log M to roundoff.

#include "wcl/fit.hpp"
#include "wcl/open_map.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wcl {

enum class TrapDirection { forward, backward, full };

struct TrappedSetSample {
    OpenMapSpec map;
    int depth = 0;
    TrapDirection direction = TrapDirection::full;
    // cell (ix, iy) covers [ix, ix+1] x [iy, iy+1] in units of M^-depth;
    // one-sided samples leave the unconstrained index at 0
    std::vector<std::array<std::uint64_t, 2>> cells;
};

// Enumerates the depth-n cylinder cover.  Throws capacity_error when the
// cell count would exceed cap, std::invalid_argument for depths that
// overflow the cell coordinates (M^depth must fit an int64).
TrappedSetSample trapped_set_sample(const OpenMapSpec& map, int depth,
                                    TrapDirection direction,
                                    std::uint64_t cap = 10'000'000);

struct DimensionEstimate {
    double dimension = 0.0;                       // slope of the count fit
    std::vector<std::array<double, 2>> points;    // (log cell size, log count)
    LineFit fit;                                  // log count vs log(1/size)
};

// Counts coarse-grainings of the sample at each depth in [depth_min,
// depth_max] and fits log count against log(1/cell size).  Needs at least
// 3 depths, all within the sample's depth.
DimensionEstimate box_dimension(const TrappedSetSample& sample, int depth_min,
                                int depth_max);

// Number of distinct cells after coarse-graining the sample to the given
// depth (counts are exact dedup counts, not D^depth formulas).
std::uint64_t coarse_cell_count(const TrappedSetSample& sample, int depth);

} // namespace wcl

#endif
