#ifndef WCL_BAKER_HPP
#define WCL_BAKER_HPP

// Quantized baker maps on C^N, N divisible by the branch count M, with
// effective Planck constant hbar_eff = 1/(2 pi N).
//
// Open propagator:   B_N = F_N^{-1} . blockdiag(G_0, ..., G_{M-1}),
// where G_i is the unitary DFT of size N/M for kept branches and the zero
// block otherwise; B_N is a partial isometry of rank D*N/M.  Damped
// propagator: D_N = U_N . diag(e^{-b(x_j)}) with U_N the closed (keep-all)
// baker and x_j = (j+1/2)/N.  Both DFTs may carry boundary phases (a,b);
// (0,0) is the plain convention, (1/2,1/2) the antiperiodic variant.
//
// The production assembly reduces each entry to a closed-form geometric
// sum (a Dirichlet kernel), never forming F_N^{-1}; the O(N^3) product of
// explicit DFT blocks is kept as the reference implementation.

#include "wcl/complex_matrix.hpp"
#include "wcl/open_map.hpp"

#include <optional>

namespace wcl {

enum class BakerKind { open, damped };

struct QuantumMapSpec {
    OpenMapSpec map;
    std::size_t N = 0;
    BakerKind kind = BakerKind::open;
    std::optional<DampingField> damping;  // present iff kind == damped
    double phase_a = 0.0, phase_b = 0.0;  // boundary phases in [0,1)

    double hbar_eff() const;
    void validate() const;
    ojson to_json() const;  // canonical builder block for spectrum records
};

ComplexMatrix quantize_open_baker(const QuantumMapSpec& spec);
ComplexMatrix quantize_damped_baker(const QuantumMapSpec& spec);

// Reference assembly via explicit DFT matrices and a dense product.
ComplexMatrix quantize_open_baker_reference(const QuantumMapSpec& spec);
ComplexMatrix quantize_damped_baker_reference(const QuantumMapSpec& spec);

// Singular values (descending) via the Hermitian eigenproblem of B^H B.
std::vector<double> singular_values(const ComplexMatrix& b);

// Number of singular values above tol; tol <= 0 selects the default
// 1e-8 * ||B||_2.  For the open baker this equals D*N/M exactly.
std::size_t rank_count(const ComplexMatrix& b, double tol = 0.0);

} // namespace wcl

#endif
