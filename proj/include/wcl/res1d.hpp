#ifndef WCL_RES1D_HPP
#define WCL_RES1D_HPP

// 1D Schrodinger resonances as eigenvalues of nonselfadjoint matrices.
//
// Two independent grid methods on the interval [-L, L] with Dirichlet ends:
//
//   CAP      H  = -(hbar^2/2) Lap_h + diag(V(x_j)) - i eta diag(W(x_j)),
//            W(x) = ((|x| - R0)_+)^2, an absorber outside the interaction
//            region that turns outgoing flux into spectral decay.
//
//   scaling  H_th = -e^{-2 i th} (hbar^2/2) Lap_h + diag(V(x_j e^{i th})),
//            uniform complex scaling; needs V analytic, so gaussian kind
//            only.  Eigenvalues in the sector arg z in (-2 th, 0] approximate
//            resonances and are th-independent up to discretization error.
//
// Lap_h is the 3-point second difference, so positions converge at O(h^2);
// that order is itself a test target.  Eigenvalues whose position moves under
// eta -> 2 eta or th -> th + dth are discretization artifacts, filtered by
// stable_resonances.

#include "wcl/complex_matrix.hpp"
#include "wcl/json_io.hpp"
#include "wcl/spectrum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wcl {

struct GaussianBump {
    double center = 0.0;
    double height = 1.0;
    double width = 1.0;
};

// Real compactly-supported (up to gaussian tails below `tail`) potential.
struct Potential1D {
    enum class Kind { gaussian_barriers, piecewise_constant };

    Kind kind = Kind::gaussian_barriers;
    std::vector<GaussianBump> bumps;   // gaussian kind: sum of A e^{-(x-c)^2/w^2}
    std::vector<double> edges;         // piecewise kind: ascending breakpoints
    std::vector<double> heights;       // piecewise kind: one per interval, 0 outside

    static Potential1D gaussian(std::vector<GaussianBump> bumps);
    static Potential1D piecewise(std::vector<double> edges, std::vector<double> heights);

    void validate() const;
    double value(double x) const;        // piecewise intervals are half-open [e_i, e_{i+1})
    cplx value_scaled(cplx z) const;     // analytic continuation, gaussian kind only
    double support_radius(double tail = 1e-12) const;
    double max_height() const;
    ojson to_json() const;
};

// The contour x + i th f(x) with f = 0 inside |x| <= r0 and f = x beyond the
// smoothing zone [r0, r0 + width]; width <= r0 keeps the zone inside 2 r0.
struct ScalingContour {
    double theta = 0.3;
    double r0 = 1.0;
    double smoothing_width = 1.0;

    void validate() const;
    double profile(double x) const;      // f(x); odd, monotone, C^1
};

// Quadratic absorbing ramp outside |x| > r0.
struct CapSpec {
    double eta = 1.0;
    double r0 = 1.0;

    void validate() const;
    double weight(double x) const;       // ((|x| - r0)_+)^2
};

struct Grid1D {
    double L = 10.0;
    std::size_t n = 400;                 // subinterval count; must be >= 200
    double hbar = 1.0;

    void validate() const;
    double h() const { return 2.0 * L / double(n); }
    std::size_t dim() const { return n - 1; }
    double x(std::size_t i) const { return -L + double(i + 1) * h(); }
};

struct BuildResult {
    ComplexMatrix H;
    std::vector<std::string> warnings;   // soft precondition violations
};

BuildResult build_hamiltonian_cap(const Grid1D& grid, const Potential1D& V,
                                  const CapSpec& cap);
BuildResult build_hamiltonian_scaled(const Grid1D& grid, const Potential1D& V,
                                     double theta);

struct Resonance {
    cplx z;
    double lifetime = 0.0;               // hbar / (2 |Im z|)
};

// Eigenvalues with Re z in the window and 0 < -Im z <= max_width * hbar,
// sorted by Re z.  An empty result is a valid empty list.
std::vector<Resonance> resonances_from_spectrum(const SpectrumRecord& rec,
                                                double e_lo, double e_hi,
                                                double max_width, double hbar);
std::vector<Resonance> resonances_from_eigenvalues(const std::vector<cplx>& eig,
                                                   double e_lo, double e_hi,
                                                   double max_width, double hbar);

// Plateau filter: members of `primary` whose nearest partner in `perturbed`
// sits within rel_tol * |z|.  Eigenvalues that drift under a parameter change
// (eta -> 2 eta, th -> th + dth) are branch artifacts, not resonances.
std::vector<Resonance> stable_resonances(const std::vector<Resonance>& primary,
                                         const std::vector<Resonance>& perturbed,
                                         double rel_tol);

// The `count` narrowest members (smallest |Im z|), re-sorted by Re z.
std::vector<Resonance> narrowest_resonances(std::vector<Resonance> list,
                                            std::size_t count);

} // namespace wcl

#endif
