#ifndef WCL_SPECTRUM_HPP
#define WCL_SPECTRUM_HPP

// A spectrum record is the exchange format between the operator builders
// and the counting/report layer: matrix dimension, a canonical builder
// description, a parameter hash, and the eigenvalue list.
//
// Eigenvalues are kept in canonical order, descending modulus with ties
// broken by descending real part then descending imaginary part, so two
// runs of the same experiment serialize to identical bytes.

#include "wcl/complex_matrix.hpp"
#include "wcl/json_io.hpp"

#include <vector>

namespace wcl {

struct SpectrumRecord {
    std::size_t n = 0;        // matrix dimension
    ojson builder;            // operator description (kind + parameters)
    std::string params_hash;  // fnv1a64 of the compact builder text
    std::vector<cplx> eigenvalues;
};

bool canonical_less(const cplx& a, const cplx& b);
void canonical_sort(std::vector<cplx>& eigs);

// Sorts the eigenvalues and fills in the hash.
SpectrumRecord make_record(std::size_t n, ojson builder, std::vector<cplx> eigs);

std::string record_to_json_text(const SpectrumRecord& rec);
// Strict loader: exactly the four known fields, finite entries, count
// matching n, canonical order.  Anything else is a domain error.
SpectrumRecord record_from_json_text(const std::string& text);

// Decay rate gamma = -log|lambda| of a propagator eigenvalue; positive
// inside the unit disc.
double map_decay_rate(const cplx& lambda);
// Lifetime 1/(2 gamma) in map time steps; infinity on the unit circle.
double map_lifetime(const cplx& lambda);

} // namespace wcl

#endif
