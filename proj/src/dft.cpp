#include "wcl/dft.hpp"

#include <cmath>
#include <numbers>

namespace wcl {

ComplexMatrix dft_matrix_phased(std::size_t n, double a, double b, FourierSign sign) {
    if (n == 0) throw std::domain_error("dft_matrix: size must be positive");
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::domain_error("dft_matrix: phases must be finite");

    const double s = (sign == FourierSign::minus) ? -1.0 : 1.0;
    const double w = s * 2.0 * std::numbers::pi / double(n);
    const double scale = 1.0 / std::sqrt(double(n));

    // (j+a)(k+b) = jk + jb + ak + ab; the integer part jk is reduced mod n
    // exactly, the rest contributes per-row and per-column phase factors.
    std::vector<cplx> tw(n), rowp(n), colp(n);
    for (std::size_t t = 0; t < n; ++t) tw[t] = std::polar(1.0, w * double(t));
    for (std::size_t j = 0; j < n; ++j) rowp[j] = std::polar(1.0, w * double(j) * b);
    for (std::size_t k = 0; k < n; ++k) colp[k] = std::polar(1.0, w * a * double(k));
    const cplx corner = std::polar(1.0, w * a * b);

    ComplexMatrix g(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        cplx* gj = g.row(j);
        const cplx pj = scale * corner * rowp[j];
        std::size_t t = 0;
        for (std::size_t k = 0; k < n; ++k) {
            gj[k] = pj * tw[t] * colp[k];
            t += j;
            if (t >= n) t -= n;
        }
    }
    return g;
}

ComplexMatrix dft_matrix(std::size_t n, FourierSign sign) {
    return dft_matrix_phased(n, 0.0, 0.0, sign);
}

} // namespace wcl
