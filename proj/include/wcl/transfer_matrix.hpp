#ifndef WCL_TRANSFER_MATRIX_HPP
#define WCL_TRANSFER_MATRIX_HPP

// Exact resonance oracle for piecewise-constant potentials.
//
// On each constant region psi = a e^{i q x} + b e^{-i q x} with
// q = sqrt(2 (z - V)) / hbar.  Matching psi and psi' across the interfaces
// gives a 2x2 transfer matrix T(z) mapping the left-exterior amplitude pair
// to the right-exterior pair.  A resonance is a purely outgoing solution
// (a_L = 0, b_R = 0), so its condition is T22(z) = 0.
//
// Exterior wavenumber branch — the only branch that matters, since T entries
// depend on each interior q only through even combinations:
//   second_sheet   k = sqrt(2 z)/hbar, principal.  Analytic off (-inf, 0];
//                  this is the continuation of the outgoing wave through the
//                  positive real axis, where resonances live.
//   physical_sheet k = i sqrt(-2 z)/hbar.  Analytic off [0, inf); boxes on
//                  the negative real axis pick up bound states.
//
// Zeros are located by argument-principle winding over the box boundary
// (uniform base split per edge, then midpoint-consistency refinement until
// no segment hides extra turning), recursive box subdivision down to
// isolated zeros, and Newton polish.  The root count is certified against
// the winding number; a mismatch throws.
//
// Contour placement: edges must stay clear of zeros, or the refinement
// cannot stabilize.  Sharp-barrier resonances sit within ~1e-9 of the
// positive real axis, far closer than any sensible edge offset, so on the
// second sheet put the box top edge ABOVE the axis (im_hi > 0 is allowed
// there): T22 has no zeros with Im z >= 0, Re z > 0 for real potentials.

#include "wcl/res1d.hpp"

#include <vector>

namespace wcl {

enum class SheetBranch { second_sheet, physical_sheet };

struct TmBox {
    double re_lo = 0.0;
    double re_hi = 1.0;
    double im_lo = -1.0;
    double im_hi = 0.0;
};

// T22 at a single point; exposed for direct checks (free case gives 1).
cplx transfer_t22(const Potential1D& V, double hbar, cplx z,
                  SheetBranch branch = SheetBranch::second_sheet);

// Zeros of T22 counted with multiplicity inside the box boundary.
int transfer_winding(const Potential1D& V, double hbar, const TmBox& box,
                     SheetBranch branch = SheetBranch::second_sheet);

// All roots of T22 in the box, certified against the winding number,
// polished by Newton, sorted by Re z.  Multiple roots appear repeated.
std::vector<Resonance> transfer_matrix_resonances(
    const Potential1D& V, double hbar, const TmBox& box,
    SheetBranch branch = SheetBranch::second_sheet);

} // namespace wcl

#endif
