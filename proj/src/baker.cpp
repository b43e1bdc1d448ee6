#include "wcl/baker.hpp"

#include "wcl/dft.hpp"
#include "wcl/eigensolver.hpp"
#include "wcl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wcl {

double QuantumMapSpec::hbar_eff() const {
    return 1.0 / (2.0 * std::numbers::pi * double(N));
}

void QuantumMapSpec::validate() const {
    map.validate();
    if (N == 0) throw std::invalid_argument("QuantumMapSpec: N must be positive");
    if (N % std::size_t(map.M) != 0)
        throw std::domain_error("QuantumMapSpec: N must be divisible by the branch count");
    if (!(phase_a >= 0.0 && phase_a < 1.0) || !(phase_b >= 0.0 && phase_b < 1.0))
        throw std::invalid_argument("QuantumMapSpec: boundary phases must lie in [0,1)");
    if (kind == BakerKind::damped) {
        if (!damping)
            throw std::domain_error("QuantumMapSpec: damped propagator needs a damping field");
        damping->validate(map.M);
        if (!map.closed())
            throw std::invalid_argument(
                "QuantumMapSpec: the damped propagator is built on the closed map");
    } else if (damping) {
        throw std::invalid_argument("QuantumMapSpec: open propagator takes no damping");
    }
}

ojson QuantumMapSpec::to_json() const {
    ojson j;
    j["kind"] = kind == BakerKind::open ? "open_baker" : "damped_baker";
    j["M"] = map.M;
    j["keep"] = map.kept;
    j["N"] = N;
    j["phases"] = ojson::array({phase_a, phase_b});
    if (damping) j["damping"] = damping->to_json();
    return j;
}

namespace {

// One entry of F_N^{-1} blockdiag(F_Q) reduces to a geometric sum over the
// block row index r:
//   B[k, iQ+j'] = (NQ)^{-1/2} e^{2 pi i g(k)} sum_{r<Q} rho^r,
//   rho = e^{2 pi i f},  f = (k+b)/N - (j'+b)/Q,
//   g = (iQ+a)(k+b)/N - a(j'+b)/Q,
// and the sum is the Dirichlet kernel e^{i pi (Q-1) ftil} sin(pi Q ftil) /
// sin(pi ftil) with ftil = f reduced to [-1/2, 1/2].  The integer part of
// the phase products is reduced mod N exactly before hitting libm.
void assemble_open(const QuantumMapSpec& spec, ComplexMatrix& out) {
    const std::size_t N = spec.N;
    const std::size_t Q = N / std::size_t(spec.map.M);
    const double a = spec.phase_a;
    const double b = spec.phase_b;
    const double scale = 1.0 / std::sqrt(double(N) * double(Q));
    const double pi = std::numbers::pi;

    const std::ptrdiff_t rows = std::ptrdiff_t(N);
    const int nt = kernel_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t k = 0; k < rows; ++k) {
        cplx* row = out.row(std::size_t(k));
        const double ck = (double(k) + b) / double(N);
        for (int ib : spec.map.kept) {
            const std::size_t off = std::size_t(ib) * Q;
            // phase part constant along the block row segment
            const std::uint64_t ik = (std::uint64_t(off) * std::uint64_t(k)) % N;
            const double gk = (double(ik) + double(off) * b + a * double(k) + a * b)
                              / double(N);
            for (std::size_t jp = 0; jp < Q; ++jp) {
                const double f = ck - (double(jp) + b) / double(Q);
                const double ftil = f - std::round(f);
                const double den = std::sin(pi * ftil);
                cplx dirichlet;
                if (den == 0.0) {
                    dirichlet = cplx(double(Q), 0.0);
                } else {
                    dirichlet = std::polar(std::sin(pi * double(Q) * ftil) / den,
                                           pi * double(Q - 1) * ftil);
                }
                const double g = gk - a * (double(jp) + b) / double(Q);
                row[off + jp] = scale * std::polar(1.0, 2.0 * pi * g) * dirichlet;
            }
        }
    }
}

std::vector<double> damping_column_factors(const QuantumMapSpec& spec) {
    const std::size_t N = spec.N;
    std::vector<double> e(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double xj = (double(j) + 0.5) / double(N);
        e[j] = std::exp(-spec.damping->at(xj, spec.map.M));
    }
    return e;
}

QuantumMapSpec closed_clone(const QuantumMapSpec& spec) {
    QuantumMapSpec u = spec;
    u.kind = BakerKind::open;
    u.damping.reset();
    return u;
}

} // namespace

ComplexMatrix quantize_open_baker(const QuantumMapSpec& spec) {
    spec.validate();
    if (spec.kind != BakerKind::open)
        throw std::invalid_argument("quantize_open_baker: spec kind is not open");
    ComplexMatrix out(spec.N, spec.N);
    assemble_open(spec, out);
    return out;
}

ComplexMatrix quantize_damped_baker(const QuantumMapSpec& spec) {
    spec.validate();
    if (spec.kind != BakerKind::damped)
        throw std::invalid_argument("quantize_damped_baker: spec kind is not damped");
    ComplexMatrix out(spec.N, spec.N);
    assemble_open(closed_clone(spec), out);
    const std::vector<double> e = damping_column_factors(spec);
    const std::ptrdiff_t rows = std::ptrdiff_t(spec.N);
    const int nt = kernel_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t k = 0; k < rows; ++k) {
        cplx* row = out.row(std::size_t(k));
        for (std::size_t j = 0; j < spec.N; ++j) row[j] *= e[j];
    }
    return out;
}

ComplexMatrix quantize_open_baker_reference(const QuantumMapSpec& spec) {
    spec.validate();
    if (spec.kind != BakerKind::open)
        throw std::invalid_argument("quantize_open_baker: spec kind is not open");
    const std::size_t N = spec.N;
    const std::size_t Q = N / std::size_t(spec.map.M);
    const ComplexMatrix finv =
        adjoint(dft_matrix_phased(N, spec.phase_a, spec.phase_b));
    const ComplexMatrix gq = dft_matrix_phased(Q, spec.phase_a, spec.phase_b);
    ComplexMatrix blocks(N, N);
    for (int ib : spec.map.kept) {
        const std::size_t off = std::size_t(ib) * Q;
        for (std::size_t r = 0; r < Q; ++r)
            for (std::size_t c = 0; c < Q; ++c) blocks(off + r, off + c) = gq(r, c);
    }
    return matmul(finv, blocks);
}

ComplexMatrix quantize_damped_baker_reference(const QuantumMapSpec& spec) {
    spec.validate();
    if (spec.kind != BakerKind::damped)
        throw std::invalid_argument("quantize_damped_baker: spec kind is not damped");
    ComplexMatrix out = quantize_open_baker_reference(closed_clone(spec));
    const std::vector<double> e = damping_column_factors(spec);
    for (std::size_t k = 0; k < spec.N; ++k)
        for (std::size_t j = 0; j < spec.N; ++j) out(k, j) *= e[j];
    return out;
}

std::vector<double> singular_values(const ComplexMatrix& b) {
    if (!b.is_square())
        throw std::domain_error("singular_values: matrix not square");
    const std::size_t n = b.rows();

    // Deflate exactly-zero columns first.  The open baker's whole rank
    // defect lives in the dropped strips, whose columns are assembled as
    // literal zeros; taking them through the Gram eigenproblem would turn
    // the 1e-16 eigenvalue error into a 1e-8 singular value error (sqrt),
    // which is exactly the default rank tolerance.
    std::vector<std::size_t> live;
    for (std::size_t j = 0; j < n; ++j) {
        bool zero = true;
        for (std::size_t i = 0; i < n && zero; ++i)
            zero = b(i, j) == cplx(0.0, 0.0);
        if (!zero) live.push_back(j);
    }

    ComplexMatrix gram(live.size(), live.size());
    for (std::size_t p = 0; p < live.size(); ++p)
        for (std::size_t q = 0; q < live.size(); ++q) {
            cplx acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += std::conj(b(i, live[p])) * b(i, live[q]);
            gram(p, q) = acc;
        }
    const std::vector<cplx> eig = gram.rows() ? eigenvalues(gram) : std::vector<cplx>{};
    std::vector<double> sv;
    sv.reserve(n);
    for (const cplx& z : eig) sv.push_back(std::sqrt(std::max(z.real(), 0.0)));
    sv.resize(n, 0.0);
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

std::size_t rank_count(const ComplexMatrix& b, double tol) {
    const std::vector<double> sv = singular_values(b);
    if (sv.empty()) return 0;
    if (tol <= 0.0) tol = 1e-8 * sv.front();
    std::size_t r = 0;
    for (double s : sv)
        if (s > tol) ++r;
    return r;
}

} // namespace wcl
