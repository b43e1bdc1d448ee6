#ifndef WCL_THERMO_HPP
#define WCL_THERMO_HPP

// Thermodynamic formalism on the symbol space of an open baker map.
//
// Pressure: P = (1/T) log sum over admissible length-T words w of
// exp(-s*T*logM - beta * sum_t b_{w_t}).  For symbol-constant damping the
// word sum factorizes, giving the closed form
//     P = log( sum_{i in kept} M^{-s} e^{-beta b_i} ),
// and the enumerated sum agrees to roundoff at any T; the enumeration is
// kept anyway as the independent oracle.
//
// Rate function: H(alpha) = inf_beta [Lambda(beta) + beta*alpha] with
// Lambda(beta) = log sum_{i in kept} e^{-beta b_i}, the large-deviation
// rate of Birkhoff averages of the damping.  H is concave, equals log D
// at alpha = mean kept damping (log M for the closed map), and is -inf
// outside [b_-, b_+].  The empirical path histograms exact length-T word
// averages instead, for cross-checks and for sampled damping fields.

#include "wcl/open_map.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wcl {

struct PressureEstimate {
    OpenMapSpec map;
    double s = 0.0;     // coefficient of the expansion potential phi_u
    double beta = 0.0;  // coefficient of the damping
    std::string weight;  // human-readable weight description
    int T = 0;
    double estimate = 0.0;     // enumerated orbit sum
    double closed_form = 0.0;  // exact value (symbol-constant damping)
    bool has_closed_form = false;
    std::optional<DampingField> damping;
};

// Orbit-sum pressure over all admissible words of length T.  The damping
// pointer may be null (beta is then ignored).  Enumeration is capped at
// word_cap words; beyond that a capacity_error is thrown.
PressureEstimate pressure(const OpenMapSpec& map, double s,
                          const DampingField* damping, double beta, int T,
                          std::uint64_t word_cap = 10'000'000);

// Closed form for per-branch damping (or no damping).
double pressure_closed_form(const OpenMapSpec& map, double s,
                            const DampingField* damping, double beta);

// Plain single-accumulator enumeration, no chunking or compensation; the
// serial reference the parallel kernel is tested and benchmarked against.
double pressure_reference(const OpenMapSpec& map, double s,
                          const DampingField* damping, double beta, int T,
                          std::uint64_t word_cap = 10'000'000);

// (1/T) * sum of the damping over the first T symbols of the word.
double birkhoff_average(const OpenMapSpec& map, const DampingField& damping,
                        const std::vector<int>& word, int T);

struct RateFunction {
    std::vector<double> alpha;
    std::vector<double> H;  // -infinity outside [b_min, b_max]
    double b_min = 0.0;     // extremal ergodic averages over kept branches
    double b_max = 0.0;
    std::string method;     // "legendre" or "empirical"
    int T = 0;              // word length, empirical path only
};

enum class RateMethod { automatic, legendre, empirical };

// window is the half-width of the empirical histogram bin around each
// alpha; <= 0 selects the default (b_max - b_min)/T, one quantum of the
// length-T average resolution.
RateFunction rate_function(const OpenMapSpec& map, const DampingField& damping,
                           const std::vector<double>& alpha_grid,
                           RateMethod method = RateMethod::automatic, int T = 16,
                           double window = 0.0,
                           std::uint64_t word_cap = 10'000'000);

} // namespace wcl

#endif
