#ifndef WCL_DFT_HPP
#define WCL_DFT_HPP

// Unitary discrete Fourier matrices, optionally with boundary phases:
//
//   G_n(a,b)[j,k] = n^{-1/2} exp(sign * 2 pi i (j+a)(k+b) / n)
//
// G_n is unitary for any real a, b.  The phase pair (0,0) is the plain
// DFT; (1/2,1/2) gives antiperiodic boundary conditions.  Entries are
// computed from an argument reduced mod n, so they stay accurate at
// sizes where j*k * (2 pi / n) would be a huge angle.

#include "wcl/complex_matrix.hpp"

#include <cstddef>

namespace wcl {

enum class FourierSign { minus, plus };

ComplexMatrix dft_matrix(std::size_t n, FourierSign sign = FourierSign::minus);

ComplexMatrix dft_matrix_phased(std::size_t n, double a, double b,
                                FourierSign sign = FourierSign::minus);

} // namespace wcl

#endif
