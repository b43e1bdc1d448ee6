// Classical layer: open-map and damping validation, exact trapped-set
// cylinder counts and box dimensions, orbit-sum pressure against the
// geometric closed form, Birkhoff averages, and the large-deviation rate
// function on both the Legendre and the empirical path.
//
// The open baker has uniform expansion, so every headline number here has
// a closed form; the enumerations must reproduce them to roundoff, which
// is what makes them usable as oracles for the quantum layer.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wcl/errors.hpp"
#include "wcl/open_map.hpp"
#include "wcl/parallel.hpp"
#include "wcl/thermo.hpp"
#include "wcl/trapped_set.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

using wcl::DampingField;
using wcl::OpenMapSpec;

TEST_CASE("open map specs validate their branch lists") {
    CHECK_NOTHROW(OpenMapSpec(3, {0, 2}).validate());
    CHECK_THROWS_AS(OpenMapSpec(1, {0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(OpenMapSpec(3, {}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(OpenMapSpec(3, {0, 3}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(OpenMapSpec(3, {2, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(OpenMapSpec(3, {0, 0}).validate(), std::invalid_argument);

    const auto m = wcl::closed_map(4);
    CHECK(m.M == 4);
    CHECK(m.D() == 4);
    CHECK(m.closed());
    CHECK(!OpenMapSpec(3, {0, 2}).closed());
    CHECK(m.log_expansion() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(OpenMapSpec(3, {0, 2}).is_kept(2));
    CHECK(!OpenMapSpec(3, {0, 2}).is_kept(1));
}

TEST_CASE("damping fields validate and interpolate") {
    CHECK_NOTHROW(DampingField::per_branch({0.0, 1.0}).validate(2));
    CHECK_THROWS_AS(DampingField::per_branch({0.0}).validate(2), std::invalid_argument);
    CHECK_THROWS_AS(DampingField::per_branch({0.0, -1.0}).validate(2),
                    std::invalid_argument);
    CHECK_THROWS_AS(DampingField::sampled({1.0}).validate(2), std::invalid_argument);
    CHECK_THROWS_AS(DampingField::per_branch(
                        {0.0, std::numeric_limits<double>::quiet_NaN()}).validate(2),
                    std::invalid_argument);

    const auto pb = DampingField::per_branch({0.5, 2.0});
    CHECK(pb.symbol_constant());
    CHECK(pb.at(0.1, 2) == 0.5);
    CHECK(pb.at(0.9, 2) == 2.0);
    CHECK(pb.branch_value(1) == 2.0);
    CHECK_THROWS_AS(pb.branch_value(2), std::invalid_argument);
    CHECK(pb.mean() == doctest::Approx(1.25));
    CHECK(pb.min_value() == 0.5);
    CHECK(pb.max_value() == 2.0);

    const OpenMapSpec open3(3, {0, 2});
    const auto pb3 = DampingField::per_branch({0.25, 9.0, 0.75});
    CHECK(pb3.min_kept(open3) == 0.25);
    CHECK(pb3.max_kept(open3) == 0.75);

    // sampled field: periodic linear interpolation between grid nodes
    const auto sf = DampingField::sampled({0.0, 1.0});
    CHECK(!sf.symbol_constant());
    CHECK(sf.at(0.0, 2) == doctest::Approx(0.0));
    CHECK(sf.at(0.25, 2) == doctest::Approx(0.5));
    CHECK(sf.at(0.75, 2) == doctest::Approx(0.5));  // wraps back toward 0
    CHECK_THROWS_AS(sf.branch_value(0), std::invalid_argument);
    CHECK_THROWS_AS(sf.min_kept(open3), std::invalid_argument);
}

TEST_CASE("trapped-set cylinder counts are exactly D^n per direction") {
    const OpenMapSpec map(3, {0, 2});
    for (int depth : {1, 3, 5}) {
        const auto fwd = wcl::trapped_set_sample(map, depth, wcl::TrapDirection::forward);
        const auto bwd = wcl::trapped_set_sample(map, depth, wcl::TrapDirection::backward);
        const auto full = wcl::trapped_set_sample(map, depth, wcl::TrapDirection::full);
        const std::uint64_t dn = std::uint64_t(std::llround(std::pow(2.0, depth)));
        CHECK(fwd.cells.size() == dn);
        CHECK(bwd.cells.size() == dn);
        CHECK(full.cells.size() == dn * dn);
        // one-sided samples leave the unconstrained index at zero
        for (const auto& c : fwd.cells) CHECK(c[1] == 0);
        for (const auto& c : bwd.cells) CHECK(c[0] == 0);
    }
}

TEST_CASE("coarse-graining counts collapse exactly") {
    const OpenMapSpec map(3, {0, 2});
    const auto full = wcl::trapped_set_sample(map, 5, wcl::TrapDirection::full);
    for (int d = 1; d <= 5; ++d) {
        const std::uint64_t dn = std::uint64_t(std::llround(std::pow(2.0, d)));
        CHECK(wcl::coarse_cell_count(full, d) == dn * dn);
    }
    CHECK_THROWS_AS(wcl::coarse_cell_count(full, 6), std::invalid_argument);
    CHECK_THROWS_AS(wcl::coarse_cell_count(full, 0), std::invalid_argument);
}

TEST_CASE("box dimension reproduces the closed forms to roundoff") {
    const OpenMapSpec map(3, {0, 2});
    const double nu = std::log(2.0) / std::log(3.0);

    const auto full = wcl::trapped_set_sample(map, 7, wcl::TrapDirection::full);
    const auto est = wcl::box_dimension(full, 1, 7);
    CHECK(est.dimension == doctest::Approx(2.0 * nu).epsilon(1e-12));
    CHECK(est.fit.residual_rms < 1e-12);
    CHECK(est.points.size() == 7);

    const auto fwd = wcl::trapped_set_sample(map, 7, wcl::TrapDirection::forward);
    CHECK(wcl::box_dimension(fwd, 1, 7).dimension
          == doctest::Approx(nu).epsilon(1e-12));

    // the closed map traps everything: dimension 2
    const auto closed = wcl::trapped_set_sample(wcl::closed_map(2), 7,
                                                wcl::TrapDirection::full);
    CHECK(wcl::box_dimension(closed, 1, 7).dimension
          == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(wcl::box_dimension(full, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(wcl::box_dimension(full, 1, 8), std::invalid_argument);
}

TEST_CASE("trapped-set sampling enforces caps and depth limits") {
    const OpenMapSpec map(3, {0, 2});
    CHECK_THROWS_AS(wcl::trapped_set_sample(map, 4, wcl::TrapDirection::full, 100),
                    wcl::capacity_error);
    CHECK_THROWS_AS(wcl::trapped_set_sample(map, 0, wcl::TrapDirection::full),
                    std::invalid_argument);
    // M^depth no longer fits the cell coordinates
    CHECK_THROWS_AS(wcl::trapped_set_sample(map, 64, wcl::TrapDirection::forward,
                                            std::uint64_t(1) << 63),
                    std::invalid_argument);
}

TEST_CASE("pressure matches the geometric closed form at any T") {
    const OpenMapSpec m32(3, {0, 2});
    const double p32 = std::log(2.0) - 0.5 * std::log(3.0);
    CHECK(wcl::pressure_closed_form(m32, 0.5, nullptr, 0.0)
          == doctest::Approx(p32).epsilon(1e-15));
    CHECK(p32 == doctest::Approx(0.1438410362258904).epsilon(1e-15));

    for (int T : {1, 5, 12}) {
        const auto est = wcl::pressure(m32, 0.5, nullptr, 0.0, T);
        CHECK(est.has_closed_form);
        CHECK(est.estimate == doctest::Approx(est.closed_form).epsilon(1e-13));
        CHECK(est.T == T);
    }

    const OpenMapSpec m53(5, {1, 3});
    const double p53 = std::log(2.0) - 0.5 * std::log(5.0);
    CHECK(p53 == doctest::Approx(-0.11157177565710485).epsilon(1e-15));
    CHECK(std::exp(p53) == doctest::Approx(0.8944271909999159).epsilon(1e-15));
    const auto est53 = wcl::pressure(m53, 0.5, nullptr, 0.0, 10);
    CHECK(est53.estimate == doctest::Approx(p53).epsilon(1e-13));

    // damped closed map: P(s=0, beta=1, b = {0, 1}) = log(1 + e^-1)
    const auto b = DampingField::per_branch({0.0, 1.0});
    const auto estd = wcl::pressure(wcl::closed_map(2), 0.0, &b, 1.0, 14);
    CHECK(estd.closed_form
          == doctest::Approx(0.31326168751822286).epsilon(1e-15));
    CHECK(estd.estimate == doctest::Approx(estd.closed_form).epsilon(1e-12));
}

TEST_CASE("pressure enumeration agrees with the serial reference bit for bit") {
    const OpenMapSpec m32(3, {0, 2});
    const auto b = DampingField::per_branch({0.1, 0.0, 0.7});
    wcl::set_kernel_threads(3);
    const auto par = wcl::pressure(m32, 0.5, &b, 1.3, 9);
    wcl::set_kernel_threads(1);
    const auto ser = wcl::pressure(m32, 0.5, &b, 1.3, 9);
    const double ref = wcl::pressure_reference(m32, 0.5, &b, 1.3, 9);
    CHECK(par.estimate == ser.estimate);  // bitwise: fixed chunking
    CHECK(par.estimate == doctest::Approx(ref).epsilon(1e-13));
    CHECK(par.estimate == doctest::Approx(par.closed_form).epsilon(1e-13));
}

TEST_CASE("sampled damping loses the closed form but still runs") {
    const auto sf = DampingField::sampled({0.0, 0.5, 1.0, 0.5});
    const auto est = wcl::pressure(wcl::closed_map(2), 0.5, &sf, 1.0, 8);
    CHECK(!est.has_closed_form);
    CHECK(std::isfinite(est.estimate));
}

TEST_CASE("pressure rejects bad arguments and oversized enumerations") {
    const OpenMapSpec m32(3, {0, 2});
    CHECK_THROWS_AS(wcl::pressure(m32, 0.5, nullptr, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(wcl::pressure(m32, std::numeric_limits<double>::quiet_NaN(),
                                  nullptr, 0.0, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(wcl::pressure(m32, 0.5, nullptr, 0.0, 30, 1000),
                    wcl::capacity_error);
    CHECK_THROWS_AS(wcl::pressure_reference(m32, 0.5, nullptr, 0.0, 30, 1000),
                    wcl::capacity_error);
}

TEST_CASE("birkhoff averages sum branch values over the word prefix") {
    const OpenMapSpec m2 = wcl::closed_map(2);
    const auto b = DampingField::per_branch({0.0, 1.0});
    CHECK(wcl::birkhoff_average(m2, b, {0, 1, 1, 0}, 4) == doctest::Approx(0.5));
    CHECK(wcl::birkhoff_average(m2, b, {1, 1, 1, 0}, 3) == doctest::Approx(1.0));
    CHECK_THROWS_AS(wcl::birkhoff_average(m2, b, {0, 1}, 3), std::domain_error);
    CHECK_THROWS_AS(wcl::birkhoff_average(m2, b, {0, 2}, 2), std::domain_error);
    CHECK_THROWS_AS(wcl::birkhoff_average(m2, b, {0, 1}, 0), std::invalid_argument);
}

TEST_CASE("legendre rate function hits the binary entropy closed form") {
    const OpenMapSpec m2 = wcl::closed_map(2);
    const auto b = DampingField::per_branch({0.0, 1.0});
    const auto rf = wcl::rate_function(m2, b, {-0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5},
                                       wcl::RateMethod::legendre);
    CHECK(rf.method == "legendre");
    CHECK(rf.b_min == 0.0);
    CHECK(rf.b_max == 1.0);
    // H(alpha) = -alpha log alpha - (1-alpha) log(1-alpha) for b = {0, 1}
    CHECK(std::isinf(rf.H[0]));
    CHECK(rf.H[0] < 0.0);
    CHECK(rf.H[1] == doctest::Approx(0.0).epsilon(1e-12));  // single extremal word
    CHECK(rf.H[2] == doctest::Approx(0.56233514461880829).epsilon(1e-12));
    CHECK(rf.H[3] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(rf.H[4] == doctest::Approx(0.56233514461880829).epsilon(1e-12));
    CHECK(rf.H[5] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isinf(rf.H[6]));
}

TEST_CASE("legendre rate function is concave on its support") {
    const OpenMapSpec m3 = wcl::closed_map(3);
    const auto b = DampingField::per_branch({0.0, 0.3, 1.0});
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(i / 40.0);
    const auto rf = wcl::rate_function(m3, b, grid, wcl::RateMethod::legendre);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double second = rf.H[i - 1] - 2.0 * rf.H[i] + rf.H[i + 1];
        CHECK(second <= 1e-9);
    }
    // maximum log 3 at the mean damping
    const auto peak = wcl::rate_function(m3, b, {b.mean()}, wcl::RateMethod::legendre);
    CHECK(peak.H[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("empirical rate function histograms exact word counts") {
    const OpenMapSpec m2 = wcl::closed_map(2);
    const auto b = DampingField::per_branch({0.0, 1.0});
    const auto rf = wcl::rate_function(m2, b, {0.25, 0.5, 0.75},
                                       wcl::RateMethod::empirical, 16);
    CHECK(rf.method == "empirical");
    CHECK(rf.T == 16);
    // default window 1/16 around k/16 keeps exactly the three adjacent
    // binomial shells; the counts are frozen integers
    const std::vector<double> frozen = {6748.0, 35750.0, 6748.0};
    for (std::size_t a = 0; a < 3; ++a) {
        const double count = std::exp(16.0 * rf.H[a]);
        CHECK(count == doctest::Approx(frozen[a]).epsilon(1e-9));
    }
    // and the histogram sits within 0.05 of the Legendre value at T = 16
    const auto exact = wcl::rate_function(m2, b, {0.25, 0.5, 0.75},
                                          wcl::RateMethod::legendre);
    for (std::size_t a = 0; a < 3; ++a)
        CHECK(std::fabs(rf.H[a] - exact.H[a]) < 0.05);
}

TEST_CASE("empirical rate function is bitwise thread independent") {
    const OpenMapSpec m2 = wcl::closed_map(2);
    const auto b = DampingField::per_branch({0.0, 1.0});
    wcl::set_kernel_threads(3);
    const auto r3 = wcl::rate_function(m2, b, {0.4}, wcl::RateMethod::empirical, 12);
    wcl::set_kernel_threads(1);
    const auto r1 = wcl::rate_function(m2, b, {0.4}, wcl::RateMethod::empirical, 12);
    CHECK(r1.H[0] == r3.H[0]);
}

TEST_CASE("rate function argument checks") {
    const OpenMapSpec m2 = wcl::closed_map(2);
    const auto b = DampingField::per_branch({0.0, 1.0});
    CHECK_THROWS_AS(wcl::rate_function(m2, b, {}), std::invalid_argument);
    CHECK_THROWS_AS(wcl::rate_function(m2, b, {0.5}, wcl::RateMethod::empirical, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(wcl::rate_function(m2, b, {0.5}, wcl::RateMethod::empirical, 40,
                                       0.0, 1000),
                    wcl::capacity_error);
    const auto sf = DampingField::sampled({0.0, 1.0});
    CHECK_THROWS_AS(wcl::rate_function(m2, sf, {0.5}, wcl::RateMethod::legendre),
                    std::invalid_argument);
    // automatic picks empirical for sampled fields
    const auto rf = wcl::rate_function(m2, sf, {0.5}, wcl::RateMethod::automatic, 8);
    CHECK(rf.method == "empirical");
}
