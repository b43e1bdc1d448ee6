#include "wcl/eigensolver.hpp"

#include "wcl/errors.hpp"
#include "wcl/parallel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

namespace wcl {

namespace {

// |Re| + |Im|, the cheap modulus used in convergence tests.
inline double cabs1(const cplx& z) { return std::fabs(z.real()) + std::fabs(z.imag()); }

// Plane rotation [c, s; -conj(s), c] with c real mapping (a,b) to (r,0).
struct Givens { double c; cplx s; };

Givens make_givens(const cplx& a, const cplx& b, cplx& r) {
    const double aa = std::abs(a);
    const double ab = std::abs(b);
    if (ab == 0.0) { r = a; return {1.0, cplx(0.0, 0.0)}; }
    if (aa == 0.0) { r = b; return {0.0, cplx(1.0, 0.0)}; }
    const double h = std::hypot(aa, ab);
    Givens g;
    g.c = aa / h;
    g.s = (a / aa) * (std::conj(b) / h);
    r = a * (h / aa);
    return g;
}

// Roots of the characteristic polynomial of [[a, b], [c, d]], larger-modulus
// root formed first, the other recovered from the product to avoid
// cancellation.
void eig2(const cplx& a, const cplx& b, const cplx& c, const cplx& d,
          cplx& e1, cplx& e2) {
    const cplx t = 0.5 * (a + d);
    const cplx det = a * d - b * c;
    // discriminant in half-difference form; t*t - det cancels to garbage
    // when the matrix is nearly scalar
    const cplx hd = 0.5 * (a - d);
    cplx q = std::sqrt(hd * hd + b * c);
    if (cabs1(t + q) < cabs1(t - q)) q = -q;
    const cplx big = t + q;
    if (cabs1(big) == 0.0) { e1 = t + q; e2 = t - q; return; }
    e1 = big;
    e2 = det / big;
}

// Shifted QR with deflation on an upper Hessenberg matrix, eigenvalues only.
// Updates stay inside the active diagonal block; entries outside it do not
// influence the block's spectrum once the subdiagonal splits.
std::vector<cplx> qr_hessenberg(ComplexMatrix& h, long budget) {
    const std::ptrdiff_t n = std::ptrdiff_t(h.rows());
    std::vector<cplx> eig(static_cast<std::size_t>(n));
    if (n == 0) return eig;

    double anorm = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - 1); j < n; ++j)
            s += cabs1(h(i, j));
        anorm = std::max(anorm, s);
    }
    if (anorm == 0.0) anorm = 1.0;

    std::vector<double> gc(static_cast<std::size_t>(n));
    std::vector<cplx> gs(static_cast<std::size_t>(n));

    std::ptrdiff_t en = n - 1;
    int its = 0;
    long total = 0;
    while (en >= 0) {
        // look for a negligible subdiagonal entry, bottom up
        std::ptrdiff_t l = 0;
        for (std::ptrdiff_t i = en; i >= 1; --i) {
            double s = cabs1(h(i - 1, i - 1)) + cabs1(h(i, i));
            if (s == 0.0) s = anorm;
            if (cabs1(h(i, i - 1)) <= DBL_EPSILON * s) {
                h(i, i - 1) = 0.0;
                l = i;
                break;
            }
        }
        if (l == en) {
            eig[std::size_t(en)] = h(en, en);
            --en;
            its = 0;
            continue;
        }
        if (en - l == 1) {
            eig2(h(l, l), h(l, l + 1), h(l + 1, l), h(l + 1, l + 1),
                 eig[std::size_t(l)], eig[std::size_t(en)]);
            en -= 2;
            its = 0;
            continue;
        }
        if (total >= budget)
            throw numerical_error("eigenvalues: QR sweep budget exhausted with a "
                                  + std::to_string(en - l + 1) + "x"
                                  + std::to_string(en - l + 1) + " block unresolved");

        cplx shift;
        if (its > 0 && its % 10 == 0) {
            // exceptional shift breaks the rare symmetric stall
            shift = cplx(std::abs(h(en, en - 1)) + std::abs(h(en - 1, en - 2)), 0.0);
        } else {
            cplx e1, e2;
            eig2(h(en - 1, en - 1), h(en - 1, en), h(en, en - 1), h(en, en), e1, e2);
            shift = (cabs1(e1 - h(en, en)) <= cabs1(e2 - h(en, en))) ? e1 : e2;
        }

        for (std::ptrdiff_t i = l; i <= en; ++i) h(i, i) -= shift;

        // factor: Givens rotations kill the subdiagonal, row pairs streamed
        for (std::ptrdiff_t i = l; i < en; ++i) {
            cplx r;
            const Givens g = make_givens(h(i, i), h(i + 1, i), r);
            gc[std::size_t(i)] = g.c;
            gs[std::size_t(i)] = g.s;
            h(i, i) = r;
            h(i + 1, i) = 0.0;
            cplx* ri = h.row(std::size_t(i));
            cplx* rj = h.row(std::size_t(i + 1));
            const cplx sc = std::conj(g.s);
            for (std::ptrdiff_t j = i + 1; j <= en; ++j) {
                const cplx x = ri[j];
                const cplx y = rj[j];
                ri[j] = g.c * x + g.s * y;
                rj[j] = g.c * y - sc * x;
            }
        }
        // multiply back on the right; per row the column pairs advance left
        // to right, which is the same arithmetic as the column-wise order
        // but with contiguous access
        for (std::ptrdiff_t r = l; r <= en; ++r) {
            cplx* hr = h.row(std::size_t(r));
            for (std::ptrdiff_t i = (r == l) ? l : r - 1; i < en; ++i) {
                const cplx x = hr[i];
                const cplx y = hr[i + 1];
                hr[i] = gc[std::size_t(i)] * x + std::conj(gs[std::size_t(i)]) * y;
                hr[i + 1] = gc[std::size_t(i)] * y - gs[std::size_t(i)] * x;
            }
        }
        for (std::ptrdiff_t i = l; i <= en; ++i) h(i, i) += shift;
        ++its;
        ++total;
    }
    return eig;
}

void hessenberg_core(ComplexMatrix& a, bool threaded) {
    const std::ptrdiff_t n = std::ptrdiff_t(a.rows());
    if (n < 3) return;
    std::vector<cplx> v(static_cast<std::size_t>(n));
    std::vector<cplx> w(static_cast<std::size_t>(n));
    const int nt = threaded ? kernel_threads() : 1;

    for (std::ptrdiff_t k = 0; k + 2 < n; ++k) {
        double low2 = 0.0;
        for (std::ptrdiff_t i = k + 2; i < n; ++i) low2 += std::norm(a(i, k));
        if (low2 == 0.0) continue;

        const cplx x0 = a(k + 1, k);
        const double xnorm = std::sqrt(std::norm(x0) + low2);
        const cplx phase = (x0 == cplx(0.0, 0.0)) ? cplx(1.0, 0.0) : x0 / std::abs(x0);
        const cplx alpha = -phase * xnorm;

        const std::ptrdiff_t m = n - (k + 1);
        v[0] = x0 - alpha;
        for (std::ptrdiff_t i = 1; i < m; ++i) v[std::size_t(i)] = a(k + 1 + i, k);
        double vn2 = 0.0;
        for (std::ptrdiff_t i = 0; i < m; ++i) vn2 += std::norm(v[std::size_t(i)]);
        const double tau = 2.0 / vn2;

        // left reflection on rows k+1.., columns k+1.. ; fixed 256-column
        // chunks keep the arithmetic identical at any thread count
        const std::ptrdiff_t c0 = k + 1;
        const std::ptrdiff_t nc = n - c0;
        const std::ptrdiff_t chunk = 256;
        const std::ptrdiff_t nchunks = (nc + chunk - 1) / chunk;
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::ptrdiff_t ch = 0; ch < nchunks; ++ch) {
            const std::ptrdiff_t cb = c0 + ch * chunk;
            const std::ptrdiff_t ce = std::min(cb + chunk, n);
            cplx* wc = w.data();
            for (std::ptrdiff_t c = cb; c < ce; ++c) wc[c] = 0.0;
            for (std::ptrdiff_t i = 0; i < m; ++i) {
                const cplx cv = std::conj(v[std::size_t(i)]);
                const cplx* row = a.row(std::size_t(k + 1 + i));
                for (std::ptrdiff_t c = cb; c < ce; ++c) wc[c] += cv * row[c];
            }
            for (std::ptrdiff_t i = 0; i < m; ++i) {
                const cplx tv = tau * v[std::size_t(i)];
                cplx* row = a.row(std::size_t(k + 1 + i));
                for (std::ptrdiff_t c = cb; c < ce; ++c) row[c] -= tv * wc[c];
            }
        }
        a(k + 1, k) = alpha;
        for (std::ptrdiff_t i = k + 2; i < n; ++i) a(i, k) = 0.0;

        // right reflection on columns k+1.., each row independent
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::ptrdiff_t r = 0; r < n; ++r) {
            cplx* row = a.row(std::size_t(r)) + c0;
            cplx u(0.0, 0.0);
            for (std::ptrdiff_t i = 0; i < m; ++i) u += row[i] * v[std::size_t(i)];
            u *= tau;
            for (std::ptrdiff_t i = 0; i < m; ++i) row[i] -= u * std::conj(v[std::size_t(i)]);
        }
    }
}

} // namespace

void hessenberg_reduce(ComplexMatrix& a) {
    if (!a.is_square()) throw std::domain_error("hessenberg_reduce: matrix not square");
    hessenberg_core(a, true);
}

void hessenberg_reduce_reference(ComplexMatrix& a) {
    if (!a.is_square()) throw std::domain_error("hessenberg_reduce: matrix not square");
    hessenberg_core(a, false);
}

std::vector<cplx> eigenvalues(const ComplexMatrix& a, const EigenOptions& opts) {
    if (!a.is_square()) throw std::domain_error("eigenvalues: matrix not square");
    if (!all_finite(a)) throw std::domain_error("eigenvalues: non-finite entry");
    const std::size_t n = a.rows();
    if (n == 0) return {};

    // A zero column j makes e_j an exact kernel vector, and ordering the
    // basis as (live, dead) leaves a block triangular matrix whose only
    // nontrivial block is the live principal submatrix.  Open maps drop
    // whole strips, so peeling these off keeps the kernel exact instead of
    // smearing it over a QR backward-error disc.
    std::vector<std::size_t> live;
    live.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        bool nonzero = false;
        for (std::size_t i = 0; i < n && !nonzero; ++i)
            nonzero = a(i, j) != cplx(0.0);
        if (nonzero) live.push_back(j);
    }
    if (live.size() < n) {
        ComplexMatrix sub(live.size(), live.size());
        for (std::size_t ii = 0; ii < live.size(); ++ii)
            for (std::size_t jj = 0; jj < live.size(); ++jj)
                sub(ii, jj) = a(live[ii], live[jj]);
        std::vector<cplx> eig = eigenvalues(sub, opts);
        eig.resize(n, cplx(0.0));
        return eig;
    }

    ComplexMatrix h = a;
    hessenberg_reduce(h);
    return qr_hessenberg(h, long(opts.sweep_budget_factor) * long(n));
}

double spectral_radius(const std::vector<cplx>& eigs) {
    double r = 0.0;
    for (const cplx& z : eigs) r = std::max(r, std::abs(z));
    return r;
}

double eigenvector_residual(const ComplexMatrix& a, cplx lambda) {
    if (!a.is_square()) throw std::domain_error("eigenvector_residual: matrix not square");
    const std::size_t n = a.rows();
    if (n == 0) return 0.0;
    double scale = max_abs(a);
    if (scale == 0.0) scale = 1.0;

    // jittered shift keeps the factorization regular at an exact eigenvalue
    const cplx mu = lambda + cplx(1e-10 * scale, 1e-10 * scale);
    ComplexMatrix b = a;
    for (std::size_t i = 0; i < n; ++i) b(i, i) -= mu;

    // LU with partial pivoting
    std::vector<std::size_t> piv(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(b(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(b(i, k)) > best) { best = std::abs(b(i, k)); p = i; }
        piv[k] = p;
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(b(k, j), b(p, j));
        if (b(k, k) == cplx(0.0, 0.0)) b(k, k) = DBL_EPSILON * scale;
        const cplx inv = 1.0 / b(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            b(i, k) *= inv;
            const cplx f = b(i, k);
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) b(i, j) -= f * b(k, j);
        }
    }

    std::vector<cplx> x(n, cplx(1.0 / std::sqrt(double(n)), 0.0));
    for (int pass = 0; pass < 3; ++pass) {
        for (std::size_t k = 0; k < n; ++k)
            if (piv[k] != k) std::swap(x[k], x[piv[k]]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= b(i, j) * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= b(i, j) * x[j];
            x[i] /= b(i, i);
        }
        double nx = 0.0;
        for (const cplx& z : x) nx += std::norm(z);
        nx = std::sqrt(nx);
        if (nx == 0.0) return std::numeric_limits<double>::infinity();
        for (cplx& z : x) z /= nx;
    }

    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx ri = -lambda * x[i];
        for (std::size_t j = 0; j < n; ++j) ri += a(i, j) * x[j];
        r2 += std::norm(ri);
    }
    return std::sqrt(r2);
}

} // namespace wcl
