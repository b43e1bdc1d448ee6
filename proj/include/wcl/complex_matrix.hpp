#ifndef WCL_COMPLEX_MATRIX_HPP
#define WCL_COMPLEX_MATRIX_HPP

// Dense complex matrices, row-major.  Small utility layer shared by the
// propagator builders, the eigensolver and the 1D Hamiltonians; heavy
// lifting (QR iteration, assembly) lives elsewhere.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wcl {

using cplx = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    cplx* row(std::size_t i) { return a_.data() + i * cols_; }
    const cplx* row(std::size_t i) const { return a_.data() + i * cols_; }

    cplx* data() { return a_.data(); }
    const cplx* data() const { return a_.data(); }

    bool is_square() const { return rows_ == cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<cplx> a_;
};

ComplexMatrix adjoint(const ComplexMatrix& a);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

// Largest entry modulus; zero for an empty matrix.
double max_abs(const ComplexMatrix& a);
// max_ij |a_ij - b_ij|, dimensions must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
// Deviation from unitarity, max_abs(a^H a - I).
double unitarity_defect(const ComplexMatrix& a);

bool all_finite(const ComplexMatrix& a);

std::complex<double> trace(const ComplexMatrix& a);

// Determinant by LU with partial pivoting.  Intended for moderate n on
// well-conditioned inputs (test oracles, certification checks).
std::complex<double> determinant_lu(ComplexMatrix a);

} // namespace wcl

#endif
