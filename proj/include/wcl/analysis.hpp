#ifndef WCL_ANALYSIS_HPP
#define WCL_ANALYSIS_HPP

// Statistical layer over spectrum records.
//
// Counting exponents: for an open map with D of M branches kept, the number
// of eigenvalues with |lambda| >= r is expected to grow like N^nu with
// nu = log D / log M (half the trapped-set box dimension).  weyl_fit
// measures the exponent by least squares on log n vs log N; the asymptotic
// claim is an upper bound, so headline tests are one-sided.
//
// Gap reports: the pressure P at weight -phi_u/2 (minus beta*b when damped)
// predicts that eigenvalue moduli eventually stay below e^P.  The verdict
// rule is explicit: consistent when every outer modulus is below
// e^P + 3/log N, inconclusive when P >= 0 predicts nothing.
//
// Concentration and large deviations for damped maps: decay rates
// gamma = -log|lambda| cluster near the mean damping b_bar, and the count
// with gamma <= alpha grows like N^{H(alpha)/log M}; both the fractions per
// epsilon and the fitted exponent per alpha are reported next to their
// classical predictions.

#include "wcl/fit.hpp"
#include "wcl/json_io.hpp"
#include "wcl/open_map.hpp"
#include "wcl/spectrum.hpp"
#include "wcl/thermo.hpp"

#include <string>
#include <vector>

namespace wcl {

// #{j : |lambda_j| >= r}; threshold restricted to [0, 1.1].
std::size_t count_moduli(const SpectrumRecord& rec, double r);

struct CountPoint {
    std::size_t N = 0;
    double r = 0.0;
    std::size_t count = 0;
    bool in_window = false;  // survived the fit window
};

struct CountProfile {
    std::vector<CountPoint> points;
    std::vector<std::string> window_flags;  // why points were dropped
    LineFit fit;                            // log count vs log N over the window
    double nu_hat = 0.0;
    double classical_nu = 0.0;  // log D / log M; NaN when records carry no map
};

// Least-squares exponent of n(N, r) ~ N^nu over records with increasing N.
// The default window drops the smallest N and any zero counts; fewer than 3
// surviving points is a fit-degenerate numerical_error.
CountProfile weyl_fit(const std::vector<SpectrumRecord>& records, double r);

enum class GapVerdict { consistent, inconsistent, inconclusive };

struct GapEntry {
    std::size_t N = 0;
    double outer_modulus = 0.0;
    double margin = 0.0;  // 3 / log N
    bool within = false;  // outer <= e^P + margin
};

struct GapReport {
    double pressure = 0.0;
    double predicted_modulus = 0.0;  // e^P
    std::vector<GapEntry> entries;
    GapVerdict verdict = GapVerdict::inconclusive;
    bool outer_strictly_decreasing = false;  // observation, not part of the verdict
    std::string note;
};

// Compares outer moduli per N against the pressure prediction.  The records
// and the pressure estimate must describe the same map and damping, and the
// weight must be -phi_u/2 (s = 1/2; beta = 1 when damped); mismatches are
// domain errors.
GapReport gap_report(const std::vector<SpectrumRecord>& records,
                     const PressureEstimate& pressure);

struct ConcentrationEntry {
    std::size_t N = 0;
    std::vector<double> fractions;  // parallel to eps_grid
};

struct ConcentrationReport {
    double b_bar = 0.0;
    std::vector<double> eps_grid;
    std::vector<ConcentrationEntry> entries;
    std::vector<double> trend_slopes;  // fraction vs log N, one per epsilon
};

// Fraction of decay rates within eps of the mean damping, per record and
// epsilon; the concentration statement predicts slopes >= 0.
ConcentrationReport concentration_report(const std::vector<SpectrumRecord>& records,
                                         const DampingField& damping,
                                         const std::vector<double>& eps_grid);

enum class LdTail { below, above };

struct LdPoint {
    double alpha = 0.0;
    CountProfile profile;      // counts of the chosen tail per N
    double h_hat = 0.0;        // fitted exponent; NaN when degenerate
    double classical_value = 0.0;  // H(alpha) / log M
    bool degenerate = false;
};

struct LdProfile {
    LdTail tail = LdTail::below;
    std::vector<LdPoint> points;
};

// Large-deviation counting per alpha in rate_fn.alpha.  The below tail
// counts gamma <= alpha, which coincides exactly with count_moduli at
// r = e^{-alpha}; the above tail counts gamma >= alpha and is reported
// without any symmetry claim.  Degenerate fits (for instance alpha below
// every branch damping, where all counts vanish) are flagged per alpha,
// not thrown.
LdProfile ld_profile(const std::vector<SpectrumRecord>& records,
                     const RateFunction& rate_fn, LdTail tail = LdTail::below);

// JSON ("schema": "wcl-report-v1") and flat CSV forms.
ojson count_profile_json(const CountProfile& p);
ojson gap_report_json(const GapReport& r);
ojson concentration_report_json(const ConcentrationReport& r);
ojson ld_profile_json(const LdProfile& p);
std::string count_profile_csv(const CountProfile& p);
std::string gap_report_csv(const GapReport& r);
std::string concentration_report_csv(const ConcentrationReport& r);
std::string ld_profile_csv(const LdProfile& p);

} // namespace wcl

#endif
