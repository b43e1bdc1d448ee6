#include "wcl/complex_matrix.hpp"

#include <cmath>

namespace wcl {

ComplexMatrix adjoint(const ComplexMatrix& a) {
    ComplexMatrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(j, i) = std::conj(a(i, j));
    return r;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows())
        throw std::domain_error("matmul: inner dimensions disagree");
    ComplexMatrix r(a.rows(), b.cols());
    // i-k-j order keeps the inner loop contiguous in both r and b.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx* ri = r.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx(0.0, 0.0)) continue;
            const cplx* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ri[j] += aik * bk[j];
        }
    }
    return r;
}

double max_abs(const ComplexMatrix& a) {
    double m = 0.0;
    const cplx* p = a.data();
    const std::size_t n = a.rows() * a.cols();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::domain_error("max_abs_diff: dimensions disagree");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

double unitarity_defect(const ComplexMatrix& a) {
    if (!a.is_square())
        throw std::domain_error("unitarity_defect: matrix not square");
    ComplexMatrix g = matmul(adjoint(a), a);
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
    return max_abs(g);
}

bool all_finite(const ComplexMatrix& a) {
    const cplx* p = a.data();
    const std::size_t n = a.rows() * a.cols();
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i].real()) || !std::isfinite(p[i].imag())) return false;
    return true;
}

std::complex<double> trace(const ComplexMatrix& a) {
    if (!a.is_square()) throw std::domain_error("trace: matrix not square");
    cplx t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

std::complex<double> determinant_lu(ComplexMatrix a) {
    if (!a.is_square()) throw std::domain_error("determinant_lu: matrix not square");
    const std::size_t n = a.rows();
    cplx det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        const cplx inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = a(i, k) * inv;
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

} // namespace wcl
