#include "wcl/thermo.hpp"

#include "wcl/errors.hpp"
#include "wcl/parallel.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace wcl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Compensated accumulator; orbit sums must hit 1e-12 agreement with the
// closed form at a million terms, which plain summation only gives on a
// good day.
struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

std::uint64_t checked_word_count(std::size_t D, int T, std::uint64_t cap,
                                 const char* who) {
    std::uint64_t count = 1;
    for (int t = 0; t < T; ++t) {
        if (count > cap / D)
            throw capacity_error(std::string(who) + ": word count would exceed cap of "
                                 + std::to_string(cap));
        count *= D;
    }
    return count;
}

// Fixed prefix length for chunked enumeration: enough prefixes to split
// the work, independent of the thread count so partial sums never move.
int prefix_len(std::size_t D, int T) {
    int p = 0;
    std::uint64_t chunks = 1;
    while (p < T && chunks < 64) {
        chunks *= D;
        ++p;
    }
    return p;
}

// Enumerates all admissible words of length T in lexicographic order,
// split into D^p fixed chunks.  leaf(chunk, digits, bsum) is called once
// per word with the kept-index digits and the per-branch damping sum.
void enumerate_words(const OpenMapSpec& map, const std::vector<double>& branch_b,
                     int T,
                     const std::function<void(std::size_t, const std::vector<int>&,
                                              double)>& leaf,
                     bool threaded) {
    const std::size_t D = map.kept.size();
    const int p = prefix_len(D, T);
    std::uint64_t nchunks = 1;
    for (int t = 0; t < p; ++t) nchunks *= D;
    const int nt = threaded ? kernel_threads() : 1;

#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t chunk = 0; chunk < std::ptrdiff_t(nchunks); ++chunk) {
        std::vector<int> digits(std::size_t(T), 0);
        double prefix_sum = 0.0;
        std::uint64_t rem = std::uint64_t(chunk);
        for (int t = p - 1; t >= 0; --t) {
            digits[std::size_t(t)] = int(rem % D);
            rem /= D;
        }
        for (int t = 0; t < p; ++t) prefix_sum += branch_b[std::size_t(digits[std::size_t(t)])];

        // depth-first over the suffix, running damping sum carried down
        std::function<void(int, double)> walk = [&](int t, double bsum) {
            if (t == T) {
                leaf(std::size_t(chunk), digits, bsum);
                return;
            }
            for (std::size_t d = 0; d < D; ++d) {
                digits[std::size_t(t)] = int(d);
                walk(t + 1, bsum + branch_b[d]);
            }
        };
        walk(p, prefix_sum);
    }
}

std::vector<double> kept_branch_values(const OpenMapSpec& map,
                                       const DampingField* damping) {
    std::vector<double> b(map.kept.size(), 0.0);
    if (damping && damping->symbol_constant())
        for (std::size_t d = 0; d < map.kept.size(); ++d)
            b[d] = damping->branch_value(map.kept[d]);
    return b;
}

// log sum_{i in kept} e^{-beta*b_i}, shifted for stability
double log_moment(const std::vector<double>& b, double beta) {
    double ref = b[0];
    for (double v : b) ref = (beta >= 0.0) ? std::min(ref, v) : std::max(ref, v);
    double s = 0.0;
    for (double v : b) s += std::exp(-beta * (v - ref));
    return -beta * ref + std::log(s);
}

// d/dbeta of -log_moment: the tilted mean of the damping, decreasing in beta
double tilted_mean(const std::vector<double>& b, double beta) {
    double ref = b[0];
    for (double v : b) ref = (beta >= 0.0) ? std::min(ref, v) : std::max(ref, v);
    double num = 0.0, den = 0.0;
    for (double v : b) {
        const double w = std::exp(-beta * (v - ref));
        num += v * w;
        den += w;
    }
    return num / den;
}

std::string weight_label(double s, double beta, bool damped) {
    std::string w = "-" + std::to_string(s) + "*phi_u";
    if (damped) w += " - " + std::to_string(beta) + "*b";
    return w;
}

// Position of the t-th point of the periodic orbit of the word, taken as
// the midpoint of the depth-T cylinder of the t-th cyclic shift.  Used to
// evaluate sampled damping fields along symbolic orbits.
double cylinder_midpoint(const OpenMapSpec& map, const std::vector<int>& digits,
                         int t, int T) {
    double x = 0.5;
    for (int u = T - 1; u >= 0; --u) {
        const int d = map.kept[std::size_t(digits[std::size_t((t + u) % T)])];
        x = (x + double(d)) / double(map.M);
    }
    return x;
}

} // namespace

double pressure_closed_form(const OpenMapSpec& map, double s,
                            const DampingField* damping, double beta) {
    double sum = 0.0;
    for (int i : map.kept) {
        const double b = damping ? damping->branch_value(i) : 0.0;
        sum += std::exp(-beta * b);
    }
    return std::log(sum) - s * std::log(double(map.M));
}

PressureEstimate pressure(const OpenMapSpec& map, double s,
                          const DampingField* damping, double beta, int T,
                          std::uint64_t word_cap) {
    map.validate();
    if (damping) damping->validate(map.M);
    if (T < 1) throw std::invalid_argument("pressure: T must be >= 1");
    if (!std::isfinite(s) || !std::isfinite(beta))
        throw std::invalid_argument("pressure: weights must be finite");
    const std::size_t D = map.kept.size();
    checked_word_count(D, T, word_cap, "pressure");

    const bool symbolic = !damping || damping->symbol_constant();
    const std::vector<double> branch_b = kept_branch_values(map, damping);

    const int p = prefix_len(D, T);
    std::uint64_t nchunks = 1;
    for (int t = 0; t < p; ++t) nchunks *= D;
    std::vector<Kahan> partial(nchunks);

    if (symbolic) {
        enumerate_words(map, branch_b, T,
                        [&](std::size_t chunk, const std::vector<int>&, double bsum) {
                            partial[chunk].add(std::exp(-beta * bsum));
                        },
                        true);
    } else {
        // sampled damping: Birkhoff sums along cylinder-midpoint orbits
        enumerate_words(map, std::vector<double>(D, 0.0), T,
                        [&](std::size_t chunk, const std::vector<int>& digits, double) {
                            double bsum = 0.0;
                            for (int t = 0; t < T; ++t)
                                bsum += damping->at(cylinder_midpoint(map, digits, t, T),
                                                    map.M);
                            partial[chunk].add(std::exp(-beta * bsum));
                        },
                        true);
    }

    Kahan total;
    for (const Kahan& v : partial) total.add(v.s);

    PressureEstimate est;
    est.map = map;
    est.s = s;
    est.beta = beta;
    est.weight = weight_label(s, beta, damping != nullptr);
    est.T = T;
    est.estimate = (total.s > 0.0 ? std::log(total.s) / double(T) : kNegInf)
                   - s * map.log_expansion();
    est.has_closed_form = symbolic;
    est.closed_form = symbolic ? pressure_closed_form(map, s, damping, beta) : 0.0;
    if (damping) est.damping = *damping;
    return est;
}

double pressure_reference(const OpenMapSpec& map, double s,
                          const DampingField* damping, double beta, int T,
                          std::uint64_t word_cap) {
    map.validate();
    if (damping) damping->validate(map.M);
    if (T < 1) throw std::invalid_argument("pressure: T must be >= 1");
    const std::size_t D = map.kept.size();
    checked_word_count(D, T, word_cap, "pressure");
    if (damping && !damping->symbol_constant())
        throw std::invalid_argument("pressure_reference: needs per-branch damping");
    const std::vector<double> b = kept_branch_values(map, damping);
    double sum = 0.0;
    std::function<void(int, double)> walk = [&](int t, double bsum) {
        if (t == T) { sum += std::exp(-beta * bsum); return; }
        for (std::size_t d = 0; d < D; ++d) walk(t + 1, bsum + b[d]);
    };
    walk(0, 0.0);
    return (sum > 0.0 ? std::log(sum) / double(T) : kNegInf) - s * map.log_expansion();
}

double birkhoff_average(const OpenMapSpec& map, const DampingField& damping,
                        const std::vector<int>& word, int T) {
    map.validate();
    damping.validate(map.M);
    if (T < 1) throw std::invalid_argument("birkhoff_average: T must be >= 1");
    if (word.size() < std::size_t(T))
        throw std::domain_error("birkhoff_average: word shorter than T");
    if (!damping.symbol_constant())
        throw std::invalid_argument("birkhoff_average: needs per-branch damping");
    double s = 0.0;
    for (int t = 0; t < T; ++t) {
        const int sym = word[std::size_t(t)];
        if (sym < 0 || sym >= map.M)
            throw std::domain_error("birkhoff_average: symbol out of range");
        s += damping.branch_value(sym);
    }
    return s / double(T);
}

RateFunction rate_function(const OpenMapSpec& map, const DampingField& damping,
                           const std::vector<double>& alpha_grid, RateMethod method,
                           int T, double window, std::uint64_t word_cap) {
    map.validate();
    damping.validate(map.M);
    if (alpha_grid.empty())
        throw std::invalid_argument("rate_function: empty alpha grid");
    if (method == RateMethod::automatic)
        method = damping.symbol_constant() ? RateMethod::legendre : RateMethod::empirical;

    RateFunction rf;
    rf.alpha = alpha_grid;
    rf.H.resize(alpha_grid.size(), kNegInf);

    if (method == RateMethod::legendre) {
        if (!damping.symbol_constant())
            throw std::invalid_argument("rate_function: analytic path needs per-branch damping");
        const std::vector<double> b = kept_branch_values(map, &damping);
        rf.method = "legendre";
        rf.b_min = damping.min_kept(map);
        rf.b_max = damping.max_kept(map);
        const double span = rf.b_max - rf.b_min;
        const double tol = 1e-12 * (1.0 + std::fabs(rf.b_min) + std::fabs(rf.b_max));
        std::size_t mult_min = 0, mult_max = 0;
        for (double v : b) {
            if (v <= rf.b_min + tol) ++mult_min;
            if (v >= rf.b_max - tol) ++mult_max;
        }
        for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
            const double alpha = alpha_grid[a];
            if (alpha < rf.b_min - tol || alpha > rf.b_max + tol) continue;  // stays -inf
            if (span <= tol) { rf.H[a] = std::log(double(b.size())); continue; }
            if (alpha <= rf.b_min + tol) { rf.H[a] = std::log(double(mult_min)); continue; }
            if (alpha >= rf.b_max - tol) { rf.H[a] = std::log(double(mult_max)); continue; }
            // solve tilted_mean(beta) = alpha, then H = Lambda(beta) + beta*alpha
            double lo = -1.0, hi = 1.0;
            while (tilted_mean(b, lo) < alpha && lo > -1e9) lo *= 2.0;
            while (tilted_mean(b, hi) > alpha && hi < 1e9) hi *= 2.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (tilted_mean(b, mid) >= alpha) lo = mid; else hi = mid;
                if (hi - lo < 1e-14 * (1.0 + std::fabs(lo))) break;
            }
            const double beta = 0.5 * (lo + hi);
            rf.H[a] = log_moment(b, beta) + beta * alpha;
        }
        return rf;
    }

    // empirical path: histogram of exact length-T word averages
    if (T < 1) throw std::invalid_argument("rate_function: T must be >= 1");
    const std::size_t D = map.kept.size();
    checked_word_count(D, T, word_cap, "rate_function");
    rf.method = "empirical";
    rf.T = T;
    const bool symbolic = damping.symbol_constant();
    if (symbolic) {
        rf.b_min = damping.min_kept(map);
        rf.b_max = damping.max_kept(map);
    } else {
        rf.b_min = damping.min_value();
        rf.b_max = damping.max_value();
    }
    const double delta = window > 0.0 ? window : (rf.b_max - rf.b_min) / double(T);
    const double slack = 1e-12 * (1.0 + std::fabs(rf.b_max) + delta);

    const std::vector<double> branch_b = kept_branch_values(map, &damping);
    const int p = prefix_len(D, T);
    std::uint64_t nchunks = 1;
    for (int t = 0; t < p; ++t) nchunks *= D;
    // exact integer counts; per-chunk tallies summed afterwards
    std::vector<std::vector<std::uint64_t>> tally(nchunks,
        std::vector<std::uint64_t>(alpha_grid.size(), 0));

    enumerate_words(map, branch_b, T,
                    [&](std::size_t chunk, const std::vector<int>& digits, double bsum) {
                        double gamma;
                        if (symbolic) {
                            gamma = bsum / double(T);
                        } else {
                            double s = 0.0;
                            for (int t = 0; t < T; ++t)
                                s += damping.at(cylinder_midpoint(map, digits, t, T), map.M);
                            gamma = s / double(T);
                        }
                        for (std::size_t a = 0; a < alpha_grid.size(); ++a)
                            if (std::fabs(gamma - alpha_grid[a]) <= delta + slack)
                                ++tally[chunk][a];
                    },
                    true);

    for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
        std::uint64_t count = 0;
        for (const auto& t : tally) count += t[a];
        rf.H[a] = count > 0 ? std::log(double(count)) / double(T) : kNegInf;
    }
    return rf;
}

} // namespace wcl
