#ifndef WCL_EIGENSOLVER_HPP
#define WCL_EIGENSOLVER_HPP

// Dense nonsymmetric complex eigensolver: Householder reduction to upper
// Hessenberg form followed by shifted QR iteration (Wilkinson shift,
// occasional exceptional shifts, deflation by negligible subdiagonals).
// Eigenvalues only, no Schur vectors, so sweeps update just the active
// diagonal block.  Cost O(n^3), memory O(n^2).
//
// The Hessenberg stage carries OpenMP pragmas arranged so the arithmetic
// per row/column chunk is independent of the thread count; results are
// bit-identical for any wcl::kernel_threads() setting.  The QR stage is
// serial.

#include "wcl/complex_matrix.hpp"

#include <vector>

namespace wcl {

struct EigenOptions {
    // Total QR sweeps permitted, as a multiple of n; exceeding the budget
    // raises numerical_error rather than returning junk.
    int sweep_budget_factor = 30;
};

// All n eigenvalues, in no particular order.  Throws std::domain_error on
// non-square or non-finite input, numerical_error on QR non-convergence.
std::vector<cplx> eigenvalues(const ComplexMatrix& a, const EigenOptions& opts = {});

// In-place reduction to upper Hessenberg form by unitary similarity.
void hessenberg_reduce(ComplexMatrix& a);
// Plain serial version, kept as the reference for tests and benchmarks.
void hessenberg_reduce_reference(ComplexMatrix& a);

double spectral_radius(const std::vector<cplx>& eigs);

// Residual ||A v - lambda v||_2 for a unit v obtained by a few inverse
// iteration steps at a slightly jittered shift.  Diagnostic only.
double eigenvector_residual(const ComplexMatrix& a, cplx lambda);

} // namespace wcl

#endif
