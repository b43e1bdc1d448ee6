// Wall-clock comparison of the OpenMP kernels against their serial
// references, plus the determinism check the kernels promise: the threaded
// paths must return bit-identical output at every thread count.  The serial
// pressure reference uses a plain accumulator, so it is reported with its
// (tiny) floating-point distance from the chunked kernel instead.
//
// Usage: wcl_bench [max_threads]   (default: hardware concurrency, capped at 8)

#include "wcl/baker.hpp"
#include "wcl/complex_matrix.hpp"
#include "wcl/eigensolver.hpp"
#include "wcl/parallel.hpp"
#include "wcl/thermo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <thread>
#include <vector>

using namespace wcl;

namespace {

double time_once(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

// median of three runs
double time_ms(const std::function<void()>& fn) {
    std::vector<double> t = {time_once(fn), time_once(fn), time_once(fn)};
    std::sort(t.begin(), t.end());
    return t[1];
}

ComplexMatrix random_matrix(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = cplx(u(rng), u(rng));
    return a;
}

// diff_ref: kernel vs serial reference (different summation order allowed);
// diff_one: kernel at this thread count vs the same kernel at 1 thread,
// which the library promises to be exactly zero.
void report(const char* label, double serial_ms, double par_ms, int threads,
            double diff_ref, double diff_one) {
    char ref_tail[48], one_tail[64];
    if (diff_ref == 0.0)
        std::snprintf(ref_tail, sizeof ref_tail, "matches reference exactly");
    else
        std::snprintf(ref_tail, sizeof ref_tail, "vs reference %.2e", diff_ref);
    if (diff_one == 0.0)
        std::snprintf(one_tail, sizeof one_tail, "bit-identical across threads");
    else
        std::snprintf(one_tail, sizeof one_tail,
                      "DIFFERS across threads by %.2e", diff_one);
    std::printf("%-30s serial %8.1f ms   %d thr %8.1f ms   x%6.2f   %s, %s\n",
                label, serial_ms, threads, par_ms,
                par_ms > 0 ? serial_ms / par_ms : 0.0, ref_tail, one_tail);
}

} // namespace

int main(int argc, char** argv) {
    int max_threads = int(std::thread::hardware_concurrency());
    if (max_threads < 1) max_threads = 1;
    if (max_threads > 8) max_threads = 8;
    if (argc > 1) max_threads = std::max(1, std::atoi(argv[1]));

    std::printf("kernels at 1..%d threads; serial column is the dedicated "
                "reference implementation\n\n",
                max_threads);

    // --- propagator assembly ---------------------------------------------
    {
        QuantumMapSpec spec;
        spec.map = closed_map(3);
        spec.N = 1296;
        spec.kind = BakerKind::damped;
        spec.damping = DampingField::per_branch({0.0, 0.4, 0.9});
        spec.validate();

        set_kernel_threads(1);
        ComplexMatrix ref;
        const double t_ref =
            time_ms([&] { ref = quantize_damped_baker_reference(spec); });
        ComplexMatrix first;
        for (int nt = 1; nt <= max_threads; nt *= 2) {
            set_kernel_threads(nt);
            ComplexMatrix par;
            const double t_par = time_ms([&] { par = quantize_damped_baker(spec); });
            if (nt == 1) first = par;
            report("damped baker assembly N=1296", t_ref, t_par, nt,
                   max_abs_diff(ref, par), max_abs_diff(first, par));
        }
    }
    std::printf("\n");

    // --- Hessenberg reduction --------------------------------------------
    {
        const ComplexMatrix a = random_matrix(512, 20260822);
        set_kernel_threads(1);
        ComplexMatrix ref;
        const double t_ref = time_ms([&] {
            ref = a;
            hessenberg_reduce_reference(ref);
        });
        ComplexMatrix first;
        for (int nt = 1; nt <= max_threads; nt *= 2) {
            set_kernel_threads(nt);
            ComplexMatrix h;
            const double t_par = time_ms([&] {
                h = a;
                hessenberg_reduce(h);
            });
            if (nt == 1) first = h;
            report("hessenberg reduction n=512", t_ref, t_par, nt,
                   max_abs_diff(ref, h), max_abs_diff(first, h));
        }
    }
    std::printf("\n");

    // --- pressure word enumeration ---------------------------------------
    {
        const OpenMapSpec map(3, {0, 2});
        const DampingField damping = DampingField::per_branch({0.1, 0.0, 0.7});
        const int T = 22;  // 2^22 admissible words

        set_kernel_threads(1);
        double ref = 0.0;
        const double t_ref =
            time_ms([&] { ref = pressure_reference(map, 0.5, &damping, 1.0, T); });
        double first = 0.0;
        for (int nt = 1; nt <= max_threads; nt *= 2) {
            set_kernel_threads(nt);
            double est = 0.0;
            const double t_par =
                time_ms([&] { est = pressure(map, 0.5, &damping, 1.0, T).estimate; });
            if (nt == 1) first = est;
            report("pressure orbit sum T=22", t_ref, t_par, nt,
                   std::abs(est - ref), std::abs(est - first));
        }
    }

    set_kernel_threads(1);
    return 0;
}
