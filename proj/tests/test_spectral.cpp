// Spectral core: eigensolver against matrices with known spectra, bitwise
// determinism of the Hessenberg stage under kernel thread counts, spectrum
// records (canonical order, strict loader), and the serialization helpers
// (fixed double format, fnv1a64 vectors, CSV, atomic writes, line fits).
//
// Eigenvalue comparisons are multiset comparisons: the solver returns no
// particular order, and canonical order itself ties equal-modulus values
// by real/imaginary part, which is fp-dependent across builds.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wcl/dft.hpp"
#include "wcl/eigensolver.hpp"
#include "wcl/errors.hpp"
#include "wcl/fit.hpp"
#include "wcl/json_io.hpp"
#include "wcl/parallel.hpp"
#include "wcl/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

using wcl::ComplexMatrix;
using wcl::cplx;

namespace {

// Multiset match: greedily pair each expected value with the nearest
// unclaimed computed one.
void check_multiset(std::vector<cplx> got, std::vector<cplx> want, double tol) {
    REQUIRE(got.size() == want.size());
    for (const cplx& w : want) {
        std::size_t best = got.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double d = std::abs(got[i] - w);
            if (d < best_d) { best_d = d; best = i; }
        }
        REQUIRE(best < got.size());
        CHECK(best_d <= tol);
        got.erase(got.begin() + std::ptrdiff_t(best));
    }
}

// Deterministic fill, no <random> so the bytes never depend on the library.
ComplexMatrix scrambled(std::size_t n, std::uint64_t seed) {
    ComplexMatrix a(n, n);
    std::uint64_t s = seed;
    auto next = [&s]() {
        s ^= s << 13; s ^= s >> 7; s ^= s << 17;
        return double(s % 10000) / 10000.0 - 0.5;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = cplx(next(), next());
    return a;
}

bool bitwise_equal(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::memcmp(a.data(), b.data(),
                       a.rows() * a.cols() * sizeof(cplx)) == 0;
}

} // namespace

TEST_CASE("dft matrix is unitary and has the known size-4 spectrum") {
    const auto f = wcl::dft_matrix(4);
    // F^H F = I
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < 4; ++k)
                acc += std::conj(f(k, i)) * f(k, j);
            CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-14);
        }
    // eigenvalue multiset of the size-4 unitary DFT: {1, 1, -1, -i}
    const auto eig = wcl::eigenvalues(f);
    check_multiset(eig, {cplx(1, 0), cplx(1, 0), cplx(-1, 0), cplx(0, -1)}, 1e-12);
}

TEST_CASE("phased dft stays unitary") {
    const auto f = wcl::dft_matrix_phased(6, 0.5, 0.5);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < 6; ++k)
                acc += std::conj(f(k, i)) * f(k, j);
            CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-14);
        }
    const auto eig = wcl::eigenvalues(f);
    for (const cplx& l : eig) CHECK(std::abs(std::abs(l) - 1.0) < 1e-12);
}

TEST_CASE("companion matrix reproduces its roots") {
    // x^3 - 6 x^2 + 11 x - 6 = (x-1)(x-2)(x-3)
    ComplexMatrix c(3, 3);
    c(0, 2) = 6.0;
    c(1, 0) = 1.0; c(1, 2) = -11.0;
    c(2, 1) = 1.0; c(2, 2) = 6.0;
    check_multiset(wcl::eigenvalues(c), {cplx(1, 0), cplx(2, 0), cplx(3, 0)}, 1e-10);
}

TEST_CASE("defective jordan block converges to the repeated eigenvalue") {
    ComplexMatrix a(2, 2);
    a(0, 0) = 1.0; a(0, 1) = 1.0; a(1, 1) = 1.0;
    check_multiset(wcl::eigenvalues(a), {cplx(1, 0), cplx(1, 0)}, 1e-7);
}

TEST_CASE("hermitian conjugation preserves a real spectrum") {
    const std::size_t n = 8;
    const auto f = wcl::dft_matrix(n);
    const std::vector<double> d = {-3.0, -1.5, -0.25, 0.0, 0.5, 1.0, 2.5, 7.0};
    // A = F diag(d) F^H
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += f(i, k) * d[k] * std::conj(f(j, k));
            a(i, j) = acc;
        }
    std::vector<cplx> want;
    for (double v : d) want.emplace_back(v, 0.0);
    check_multiset(wcl::eigenvalues(a), want, 1e-10);
}

TEST_CASE("near-identity matrices converge instead of stalling") {
    const std::size_t n = 12;
    ComplexMatrix a = ComplexMatrix::identity(n);
    for (std::size_t i = 0; i + 1 < n; ++i) a(i, i + 1) = 1e-10;
    const auto eig = wcl::eigenvalues(a);
    for (const cplx& l : eig) CHECK(std::abs(l - 1.0) < 1e-6);
}

TEST_CASE("eigensolver rejects bad input") {
    CHECK_THROWS_AS(wcl::eigenvalues(ComplexMatrix(3, 4)), std::domain_error);
    ComplexMatrix a(2, 2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(wcl::eigenvalues(a), std::domain_error);
}

TEST_CASE("hessenberg reduction matches the serial reference and is "
          "bit-identical across kernel thread counts") {
    const auto a0 = scrambled(96, 12345);

    auto ref = a0;
    wcl::hessenberg_reduce_reference(ref);

    wcl::set_kernel_threads(1);
    auto h1 = a0;
    wcl::hessenberg_reduce(h1);
    wcl::set_kernel_threads(3);
    auto h3 = a0;
    wcl::hessenberg_reduce(h3);
    wcl::set_kernel_threads(1);

    CHECK(bitwise_equal(h1, h3));

    // reference and production agree to roundoff (not bitwise: the chunked
    // update sums in a different order)
    double max_d = 0.0;
    for (std::size_t i = 0; i < 96; ++i)
        for (std::size_t j = 0; j < 96; ++j)
            max_d = std::max(max_d, std::abs(h1(i, j) - ref(i, j)));
    CHECK(max_d < 1e-10);

    // subdiagonal structure
    for (std::size_t i = 2; i < 96; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j)
            CHECK(std::abs(h1(i, j)) == 0.0);
}

TEST_CASE("eigenvalues are bit-identical across kernel thread counts") {
    const auto a = scrambled(64, 987);
    wcl::set_kernel_threads(1);
    auto e1 = wcl::eigenvalues(a);
    wcl::set_kernel_threads(4);
    auto e4 = wcl::eigenvalues(a);
    wcl::set_kernel_threads(1);
    REQUIRE(e1.size() == e4.size());
    CHECK(std::memcmp(e1.data(), e4.data(), e1.size() * sizeof(cplx)) == 0);
}

TEST_CASE("spectral radius and eigenvector residual") {
    const auto a = scrambled(24, 55);
    const auto eig = wcl::eigenvalues(a);
    double want = 0.0;
    for (const cplx& l : eig) want = std::max(want, std::abs(l));
    CHECK(wcl::spectral_radius(eig) == want);
    // every eigenvalue supports a small residual eigenvector
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(wcl::eigenvector_residual(a, eig[i]) < 1e-6);
}

TEST_CASE("canonical eigenvalue order is descending modulus with tie-breaks") {
    std::vector<cplx> v = {cplx(0, 1), cplx(1, 0), cplx(-1, 0), cplx(0.5, 0),
                           cplx(0, -1)};
    wcl::canonical_sort(v);
    CHECK(v[0] == cplx(1, 0));      // largest real among modulus 1
    CHECK(v[1] == cplx(0, 1));      // real 0, +imag before -imag
    CHECK(v[2] == cplx(0, -1));
    CHECK(v[3] == cplx(-1, 0));
    CHECK(v[4] == cplx(0.5, 0));
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        CHECK(!wcl::canonical_less(v[i + 1], v[i]));
}

TEST_CASE("spectrum records round-trip and the loader is strict") {
    wcl::ojson builder;
    builder["kind"] = "toy";
    builder["n"] = 3;
    auto rec = wcl::make_record(3, builder,
                                {cplx(0.5, 0), cplx(1, 0), cplx(0, -0.25)});
    CHECK(rec.params_hash == wcl::hash_hex(wcl::json_emit_compact(builder)));
    CHECK(rec.eigenvalues[0] == cplx(1, 0));  // sorted on construction

    const std::string text = wcl::record_to_json_text(rec);
    const auto back = wcl::record_from_json_text(text);
    CHECK(back.n == rec.n);
    CHECK(back.params_hash == rec.params_hash);
    CHECK(back.eigenvalues == rec.eigenvalues);
    CHECK(wcl::record_to_json_text(back) == text);  // byte-identical round trip

    // strictness: unknown field
    {
        auto j = wcl::ojson::parse(text);
        j["extra"] = 1;
        CHECK_THROWS_AS(wcl::record_from_json_text(j.dump()), std::domain_error);
    }
    // count mismatch
    {
        auto j = wcl::ojson::parse(text);
        j["n"] = 4;
        CHECK_THROWS_AS(wcl::record_from_json_text(j.dump()), std::domain_error);
    }
    // non-canonical order
    {
        auto j = wcl::ojson::parse(text);
        std::swap(j["eigenvalues"][0], j["eigenvalues"][2]);
        CHECK_THROWS_AS(wcl::record_from_json_text(j.dump()), std::domain_error);
    }
    // non-finite entry
    {
        auto j = wcl::ojson::parse(text);
        j["eigenvalues"][0][0] = nullptr;
        CHECK_THROWS_AS(wcl::record_from_json_text(j.dump()), std::domain_error);
    }
    // missing field
    {
        auto j = wcl::ojson::parse(text);
        j.erase("params_hash");
        CHECK_THROWS_AS(wcl::record_from_json_text(j.dump()), std::domain_error);
    }
}

TEST_CASE("decay rates and lifetimes") {
    CHECK(wcl::map_decay_rate(cplx(1, 0)) == 0.0);
    CHECK(wcl::map_decay_rate(cplx(0.5, 0)) == doctest::Approx(std::log(2.0)));
    CHECK(std::isinf(wcl::map_lifetime(cplx(0, 1))));
    CHECK(wcl::map_lifetime(cplx(std::exp(-0.25), 0)) == doctest::Approx(2.0));
}

TEST_CASE("format_double is fixed-width %.17g with null for non-finite") {
    CHECK(wcl::format_double(1.0) == "1");
    CHECK(wcl::format_double(0.1) == "0.10000000000000001");
    CHECK(wcl::format_double(-2.5e-300) == "-2.5e-300");  // %g strips zeros
    CHECK(wcl::format_double(std::numeric_limits<double>::infinity()) == "null");
    CHECK(wcl::format_double(std::numeric_limits<double>::quiet_NaN()) == "null");
    // round trip
    const std::string s = wcl::format_double(0.38342821960143313);
    CHECK(std::stod(s) == 0.38342821960143313);
}

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(wcl::fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(wcl::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(wcl::hash_hex("") == "cbf29ce484222325");
    CHECK(wcl::hash_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("csv tables carry a header and reject ragged rows") {
    const auto t = wcl::csv_table({"a", "b"}, {{"1", "2"}, {"3", "4"}});
    CHECK(t == "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(wcl::csv_table({"a", "b"}, {{"1"}}), std::invalid_argument);
}

TEST_CASE("atomic writes land complete and leave no temp file") {
    const std::string path = "wcl_test_atomic.json";
    wcl::write_file_atomic(path, "{\"x\": 1}\n");
    CHECK(wcl::read_file(path) == "{\"x\": 1}\n");
    std::ifstream tmp(path + ".tmp");
    CHECK(!tmp.good());
    std::remove(path.c_str());
    CHECK_THROWS_AS(wcl::read_file(path), std::runtime_error);
}

TEST_CASE("json_emit renders stable bytes") {
    wcl::ojson j;
    j["b"] = 2;      // insertion order preserved, not sorted
    j["a"] = 0.5;
    j["list"] = wcl::ojson::array({1.0, 2.0});
    CHECK(wcl::json_emit_compact(j) == "{\"b\":2,\"a\":0.5,\"list\":[1,2]}");
    CHECK(wcl::json_emit(j) ==
          "{\n  \"b\": 2,\n  \"a\": 0.5,\n  \"list\": [\n    1,\n    2\n  ]\n}\n");
}

TEST_CASE("line fit recovers exact lines and reports spread") {
    const auto f = wcl::fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.residual_rms == doctest::Approx(0.0));
    CHECK(f.slope_stderr == doctest::Approx(0.0));

    const auto g = wcl::fit_line({0, 1, 2}, {0, 1, 1});
    CHECK(g.residual_rms > 0.0);
    CHECK(g.slope_stderr > 0.0);

    CHECK_THROWS_AS(wcl::fit_line({1}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(wcl::fit_line({1, 1}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(wcl::fit_line({1, 2}, {1}), std::invalid_argument);
}
