#ifndef WCL_OPEN_MAP_HPP
#define WCL_OPEN_MAP_HPP

// Classical side of the lab: the open baker map with M uniformly expanding
// branches of which a subset survives, plus a damping field on the torus.
//
// The baker acts on the unit square by x -> Mx mod 1, with the vertical
// strip index i = floor(Mx) as the symbol; orbits whose symbols leave the
// kept set are absorbed.  The per-step unstable Jacobian is log M on every
// branch, so all thermodynamic sums are exactly geometric.

#include "wcl/json_io.hpp"

#include <vector>

namespace wcl {

struct OpenMapSpec {
    int M = 2;              // branch count
    std::vector<int> kept;  // strictly increasing subset of {0..M-1}

    OpenMapSpec() = default;
    OpenMapSpec(int branches, std::vector<int> kept_branches);

    int D() const { return int(kept.size()); }
    bool closed() const { return D() == M; }
    // per-step expansion rate, uniform across branches
    double log_expansion() const;
    bool is_kept(int branch) const;

    void validate() const;  // throws std::invalid_argument
    ojson to_json() const;
    bool operator==(const OpenMapSpec& o) const { return M == o.M && kept == o.kept; }
};

// Returns the closed map on M branches.
OpenMapSpec closed_map(int M);

// Damping b(x) >= 0, either one constant per vertical strip or sampled on
// a uniform grid over [0,1) with periodic linear interpolation.
struct DampingField {
    enum class Kind { per_branch, sampled };

    Kind kind = Kind::per_branch;
    std::vector<double> values;  // per-branch constants, or grid samples

    static DampingField per_branch(std::vector<double> b);
    static DampingField sampled(std::vector<double> samples);

    void validate(int M) const;
    bool symbol_constant() const { return kind == Kind::per_branch; }

    // b at position x in [0,1); M gives the strip width for per-branch fields
    double at(double x, int M) const;
    // constant of the i-th strip (per-branch kind only)
    double branch_value(int i) const;

    // Mean over the invariant (Lebesgue) measure of the closed map.
    double mean() const;
    // Pointwise extremes; for per-branch damping these are also the extremal
    // ergodic averages b_- and b_+.
    double min_value() const;
    double max_value() const;
    // Restricted extremes over the kept branches (per-branch kind only).
    double min_kept(const OpenMapSpec& map) const;
    double max_kept(const OpenMapSpec& map) const;

    ojson to_json() const;
    bool operator==(const DampingField& o) const {
        return kind == o.kind && values == o.values;
    }
};

} // namespace wcl

#endif
