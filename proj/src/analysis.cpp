#include "wcl/analysis.hpp"

#include "wcl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wcl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> order_by_n(const std::vector<SpectrumRecord>& records) {
    std::vector<std::size_t> idx(records.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return records[a].n < records[b].n;
    });
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (records[idx[i]].n == records[idx[i - 1]].n)
            throw std::invalid_argument("analysis: records must have distinct N");
    return idx;
}

// Map parameters from a record's builder block, when present.
struct MapTag {
    bool present = false;
    int M = 0;
    std::vector<int> kept;
};

MapTag map_tag(const SpectrumRecord& rec) {
    MapTag t;
    if (!rec.builder.is_object() || !rec.builder.contains("M") ||
        !rec.builder.contains("keep"))
        return t;
    t.present = true;
    t.M = rec.builder.at("M").get<int>();
    t.kept = rec.builder.at("keep").get<std::vector<int>>();
    return t;
}

double classical_nu_of(const std::vector<SpectrumRecord>& records) {
    MapTag first = map_tag(records.front());
    if (!first.present) return kNaN;
    for (const SpectrumRecord& rec : records) {
        MapTag t = map_tag(rec);
        if (!t.present || t.M != first.M || t.kept != first.kept)
            throw std::domain_error("analysis: records mix different maps");
    }
    return std::log(double(first.kept.size())) / std::log(double(first.M));
}

// Shared exponent fit: drop the smallest N and zero counts, then fit
// log count against log N.  Returns false when fewer than 3 points remain.
bool fit_window(CountProfile& p) {
    if (!p.points.empty()) {
        p.points.front().in_window = false;
        p.window_flags.push_back("dropped smallest N (transient)");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        CountPoint& pt = p.points[i];
        if (pt.count == 0) {
            pt.in_window = false;
            p.window_flags.push_back("dropped zero count at N=" +
                                     std::to_string(pt.N));
            continue;
        }
        pt.in_window = true;
        lx.push_back(std::log(double(pt.N)));
        ly.push_back(std::log(double(pt.count)));
    }
    if (lx.size() < 3) return false;
    p.fit = fit_line(lx, ly);
    p.nu_hat = p.fit.slope;
    return true;
}

} // namespace

std::size_t count_moduli(const SpectrumRecord& rec, double r) {
    if (!(r >= 0.0) || !(r <= 1.1))
        throw std::invalid_argument("count_moduli: threshold must lie in [0, 1.1]");
    std::size_t c = 0;
    for (const cplx& z : rec.eigenvalues)
        if (std::abs(z) >= r) ++c;
    return c;
}

CountProfile weyl_fit(const std::vector<SpectrumRecord>& records, double r) {
    if (records.size() < 3)
        throw std::invalid_argument("weyl_fit: need at least 3 records");
    const std::vector<std::size_t> idx = order_by_n(records);
    CountProfile p;
    p.classical_nu = classical_nu_of(records);
    for (std::size_t i : idx)
        p.points.push_back(CountPoint{records[i].n, r, count_moduli(records[i], r), false});
    if (!fit_window(p))
        throw numerical_error("weyl_fit: fit degenerate, fewer than 3 usable points");
    return p;
}

GapReport gap_report(const std::vector<SpectrumRecord>& records,
                     const PressureEstimate& pressure) {
    if (records.empty()) throw std::invalid_argument("gap_report: no records");
    const std::vector<std::size_t> idx = order_by_n(records);
    for (const SpectrumRecord& rec : records) {
        MapTag t = map_tag(rec);
        if (!t.present)
            throw std::domain_error("gap_report: records carry no map description");
        if (t.M != pressure.map.M || t.kept != pressure.map.kept)
            throw std::domain_error(
                "gap_report: spectra and pressure describe different maps");
        const bool rec_damped = rec.builder.contains("damping");
        if (rec_damped != pressure.damping.has_value())
            throw std::domain_error(
                "gap_report: damping present on one side of the comparison only");
        if (rec_damped && rec.builder.at("damping") != pressure.damping->to_json())
            throw std::domain_error(
                "gap_report: spectra and pressure use different damping fields");
    }
    if (pressure.s != 0.5)
        throw std::domain_error("gap_report: pressure weight must be -phi_u/2 (s = 1/2)");
    if (pressure.damping && pressure.beta != 1.0)
        throw std::domain_error(
            "gap_report: damped pressure weight must carry the damping once (beta = 1)");

    GapReport rep;
    rep.pressure = pressure.estimate;
    rep.predicted_modulus = std::exp(pressure.estimate);
    for (std::size_t i : idx) {
        const SpectrumRecord& rec = records[i];
        if (rec.n < 2)
            throw std::invalid_argument("gap_report: records must have N >= 2");
        double outer = 0.0;
        for (const cplx& z : rec.eigenvalues) outer = std::max(outer, std::abs(z));
        GapEntry e;
        e.N = rec.n;
        e.outer_modulus = outer;
        e.margin = 3.0 / std::log(double(rec.n));
        e.within = outer <= rep.predicted_modulus + e.margin;
        rep.entries.push_back(e);
    }
    rep.outer_strictly_decreasing = rep.entries.size() >= 2;
    for (std::size_t i = 1; i < rep.entries.size(); ++i)
        if (!(rep.entries[i].outer_modulus < rep.entries[i - 1].outer_modulus))
            rep.outer_strictly_decreasing = false;

    if (rep.pressure >= 0.0) {
        rep.verdict = GapVerdict::inconclusive;
        rep.note = "no gap predicted (pressure >= 0)";
    } else {
        bool all_within = true;
        for (const GapEntry& e : rep.entries) all_within = all_within && e.within;
        rep.verdict = all_within ? GapVerdict::consistent : GapVerdict::inconsistent;
        rep.note = all_within
                       ? "outer moduli within e^P + 3/log N at every N"
                       : "some outer modulus exceeds e^P + 3/log N";
        if (all_within && rep.outer_strictly_decreasing)
            rep.note += "; outer moduli strictly decreasing with N";
    }
    return rep;
}

ConcentrationReport concentration_report(const std::vector<SpectrumRecord>& records,
                                         const DampingField& damping,
                                         const std::vector<double>& eps_grid) {
    if (records.empty())
        throw std::invalid_argument("concentration_report: no records");
    if (eps_grid.empty())
        throw std::invalid_argument("concentration_report: empty epsilon grid");
    for (double e : eps_grid)
        if (!(e > 0.0))
            throw std::invalid_argument("concentration_report: epsilon must be positive");
    const std::vector<std::size_t> idx = order_by_n(records);
    ConcentrationReport rep;
    rep.b_bar = damping.mean();
    rep.eps_grid = eps_grid;
    for (std::size_t i : idx) {
        const SpectrumRecord& rec = records[i];
        ConcentrationEntry entry;
        entry.N = rec.n;
        for (double eps : eps_grid) {
            std::size_t c = 0;
            for (const cplx& z : rec.eigenvalues)
                if (std::abs(map_decay_rate(z) - rep.b_bar) < eps) ++c;
            entry.fractions.push_back(double(c) / double(rec.n));
        }
        rep.entries.push_back(std::move(entry));
    }
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        double slope = kNaN;
        if (rep.entries.size() >= 2) {
            std::vector<double> lx, fy;
            for (const ConcentrationEntry& e : rep.entries) {
                lx.push_back(std::log(double(e.N)));
                fy.push_back(e.fractions[k]);
            }
            slope = fit_line(lx, fy).slope;
        }
        rep.trend_slopes.push_back(slope);
    }
    return rep;
}

LdProfile ld_profile(const std::vector<SpectrumRecord>& records,
                     const RateFunction& rate_fn, LdTail tail) {
    if (records.size() < 3)
        throw std::invalid_argument("ld_profile: need at least 3 records");
    if (rate_fn.alpha.empty())
        throw std::invalid_argument("ld_profile: empty alpha grid");
    const std::vector<std::size_t> idx = order_by_n(records);
    MapTag first = map_tag(records.front());
    if (!first.present)
        throw std::domain_error("ld_profile: records carry no map description");
    classical_nu_of(records);  // same-map check
    const double log_m = std::log(double(first.M));

    LdProfile prof;
    prof.tail = tail;
    for (std::size_t a = 0; a < rate_fn.alpha.size(); ++a) {
        const double alpha = rate_fn.alpha[a];
        const double thr = std::exp(-alpha);
        LdPoint pt;
        pt.alpha = alpha;
        pt.classical_value = rate_fn.H[a] / log_m;
        for (std::size_t i : idx) {
            const SpectrumRecord& rec = records[i];
            std::size_t c = 0;
            // gamma <= alpha means |lambda| >= e^{-alpha}; the above tail
            // takes the complement with the boundary included on both sides
            for (const cplx& z : rec.eigenvalues) {
                const bool in = tail == LdTail::below ? std::abs(z) >= thr
                                                      : std::abs(z) <= thr;
                if (in) ++c;
            }
            pt.profile.points.push_back(CountPoint{rec.n, thr, c, false});
        }
        if (fit_window(pt.profile)) {
            pt.h_hat = pt.profile.nu_hat;
        } else {
            pt.h_hat = kNaN;
            pt.degenerate = true;
            pt.profile.window_flags.push_back("fit degenerate at alpha=" +
                                              format_double(alpha));
        }
        pt.profile.classical_nu = pt.classical_value;
        prof.points.push_back(std::move(pt));
    }
    return prof;
}

namespace {

ojson fit_json(const LineFit& f) {
    ojson j;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["residual_rms"] = f.residual_rms;
    j["slope_stderr"] = f.slope_stderr;
    return j;
}

ojson points_json(const std::vector<CountPoint>& pts) {
    ojson arr = ojson::array();
    for (const CountPoint& p : pts) {
        ojson e;
        e["N"] = p.N;
        e["r"] = p.r;
        e["count"] = p.count;
        e["in_window"] = p.in_window;
        arr.push_back(std::move(e));
    }
    return arr;
}

const char* verdict_name(GapVerdict v) {
    switch (v) {
        case GapVerdict::consistent: return "consistent";
        case GapVerdict::inconsistent: return "inconsistent";
        default: return "inconclusive";
    }
}

} // namespace

ojson count_profile_json(const CountProfile& p) {
    ojson j;
    j["schema"] = "wcl-report-v1";
    j["kind"] = "count_profile";
    j["points"] = points_json(p.points);
    j["window_flags"] = p.window_flags;
    j["fit"] = fit_json(p.fit);
    j["nu_hat"] = p.nu_hat;
    j["classical_nu"] = p.classical_nu;
    return j;
}

ojson gap_report_json(const GapReport& r) {
    ojson j;
    j["schema"] = "wcl-report-v1";
    j["kind"] = "gap_report";
    j["pressure"] = r.pressure;
    j["predicted_modulus"] = r.predicted_modulus;
    ojson arr = ojson::array();
    for (const GapEntry& e : r.entries) {
        ojson entry;
        entry["N"] = e.N;
        entry["outer_modulus"] = e.outer_modulus;
        entry["margin"] = e.margin;
        entry["within"] = e.within;
        arr.push_back(std::move(entry));
    }
    j["entries"] = std::move(arr);
    j["verdict"] = verdict_name(r.verdict);
    j["outer_strictly_decreasing"] = r.outer_strictly_decreasing;
    j["note"] = r.note;
    return j;
}

ojson concentration_report_json(const ConcentrationReport& r) {
    ojson j;
    j["schema"] = "wcl-report-v1";
    j["kind"] = "concentration_report";
    j["b_bar"] = r.b_bar;
    j["eps_grid"] = r.eps_grid;
    ojson arr = ojson::array();
    for (const ConcentrationEntry& e : r.entries) {
        ojson entry;
        entry["N"] = e.N;
        entry["fractions"] = e.fractions;
        arr.push_back(std::move(entry));
    }
    j["entries"] = std::move(arr);
    j["trend_slopes"] = r.trend_slopes;
    return j;
}

ojson ld_profile_json(const LdProfile& p) {
    ojson j;
    j["schema"] = "wcl-report-v1";
    j["kind"] = "ld_profile";
    j["tail"] = p.tail == LdTail::below ? "below" : "above";
    ojson arr = ojson::array();
    for (const LdPoint& pt : p.points) {
        ojson e;
        e["alpha"] = pt.alpha;
        e["h_hat"] = pt.h_hat;
        e["classical_value"] = pt.classical_value;
        e["degenerate"] = pt.degenerate;
        e["points"] = points_json(pt.profile.points);
        e["window_flags"] = pt.profile.window_flags;
        e["fit"] = fit_json(pt.profile.fit);
        arr.push_back(std::move(e));
    }
    j["alphas"] = std::move(arr);
    return j;
}

std::string count_profile_csv(const CountProfile& p) {
    std::vector<std::vector<std::string>> rows;
    for (const CountPoint& pt : p.points)
        rows.push_back({std::to_string(pt.N), format_double(pt.r),
                        std::to_string(pt.count), pt.in_window ? "1" : "0"});
    return csv_table({"N", "r", "count", "in_window"}, rows);
}

std::string gap_report_csv(const GapReport& r) {
    std::vector<std::vector<std::string>> rows;
    for (const GapEntry& e : r.entries)
        rows.push_back({std::to_string(e.N), format_double(e.outer_modulus),
                        format_double(r.predicted_modulus), format_double(e.margin),
                        e.within ? "1" : "0"});
    return csv_table({"N", "outer_modulus", "predicted_modulus", "margin", "within"},
                     rows);
}

std::string concentration_report_csv(const ConcentrationReport& r) {
    std::vector<std::vector<std::string>> rows;
    for (const ConcentrationEntry& e : r.entries)
        for (std::size_t k = 0; k < r.eps_grid.size(); ++k)
            rows.push_back({std::to_string(e.N), format_double(r.eps_grid[k]),
                            format_double(e.fractions[k])});
    return csv_table({"N", "eps", "fraction"}, rows);
}

std::string ld_profile_csv(const LdProfile& p) {
    std::vector<std::vector<std::string>> rows;
    for (const LdPoint& pt : p.points)
        for (const CountPoint& cp : pt.profile.points)
            rows.push_back({format_double(pt.alpha), std::to_string(cp.N),
                            std::to_string(cp.count), format_double(pt.h_hat),
                            format_double(pt.classical_value)});
    return csv_table({"alpha", "N", "count", "h_hat", "classical_value"}, rows);
}

} // namespace wcl
