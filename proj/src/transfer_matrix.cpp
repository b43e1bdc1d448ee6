#include "wcl/transfer_matrix.hpp"

#include "wcl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wcl {

namespace {

struct M22 {
    cplx a11, a12, a21, a22;
};

M22 mul(const M22& l, const M22& r) {
    return M22{l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
               l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
}

cplx exterior_k(cplx z, double hbar, SheetBranch branch) {
    if (branch == SheetBranch::second_sheet) return std::sqrt(2.0 * z) / hbar;
    return cplx(0.0, 1.0) * std::sqrt(-2.0 * z) / hbar;
}

struct Profile {
    std::vector<double> edges;    // interface positions, ascending
    std::vector<double> levels;   // region heights, levels[i] left of edges[i]
};

Profile make_profile(const Potential1D& V) {
    if (V.kind != Potential1D::Kind::piecewise_constant)
        throw std::invalid_argument(
            "transfer matrix: potential must be piecewise constant");
    V.validate();
    Profile p;
    p.edges = V.edges;
    p.levels.push_back(0.0);
    for (double h : V.heights) p.levels.push_back(h);
    p.levels.push_back(0.0);
    return p;
}

cplx t22_eval(const Profile& p, double hbar, cplx z, SheetBranch branch) {
    const std::size_t nreg = p.levels.size();
    std::vector<cplx> q(nreg);
    for (std::size_t r = 0; r < nreg; ++r) {
        if (r == 0 || r + 1 == nreg)
            q[r] = exterior_k(z, hbar, branch);
        else
            q[r] = std::sqrt(2.0 * (z - p.levels[r])) / hbar;
    }
    M22 T{1.0, 0.0, 0.0, 1.0};
    const cplx iu(0.0, 1.0);
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        const double e = p.edges[i];
        const cplx ql = q[i];
        const cplx qr = q[i + 1];
        const cplx ratio = ql / qr;
        const cplx ap = 0.5 * (1.0 + ratio);
        const cplx am = 0.5 * (1.0 - ratio);
        const cplx el_p = std::exp(iu * ql * e);
        const cplx el_m = std::exp(-iu * ql * e);
        const cplx er_p = std::exp(iu * qr * e);
        const cplx er_m = std::exp(-iu * qr * e);
        const M22 step{er_m * ap * el_p, er_m * am * el_m,
                       er_p * am * el_p, er_p * ap * el_m};
        T = mul(step, T);
    }
    if (!std::isfinite(T.a22.real()) || !std::isfinite(T.a22.imag()))
        throw numerical_error("transfer matrix: amplitude overflow while propagating");
    return T.a22;
}

void check_box(const TmBox& box, SheetBranch branch) {
    if (!(box.re_lo < box.re_hi) || !(box.im_lo < box.im_hi))
        throw std::invalid_argument("transfer matrix: degenerate search box");
    if (!std::isfinite(box.re_lo) || !std::isfinite(box.re_hi) ||
        !std::isfinite(box.im_lo) || !std::isfinite(box.im_hi))
        throw std::invalid_argument("transfer matrix: search box must be finite");
    if (branch == SheetBranch::second_sheet && !(box.re_lo > 0.0))
        throw std::invalid_argument(
            "transfer matrix: second-sheet box must stay right of the cut at "
            "(-inf, 0]");
    if (branch == SheetBranch::physical_sheet && !(box.re_hi < 0.0))
        throw std::invalid_argument(
            "transfer matrix: physical-sheet box must stay left of the cut at "
            "[0, inf)");
    if (!(box.im_lo < 0.0))
        throw std::invalid_argument(
            "transfer matrix: search box must reach into the lower half plane");
}

struct Tracker {
    const Profile* p;
    double hbar;
    SheetBranch branch;

    cplx f(cplx z) const { return t22_eval(*p, hbar, z, branch); }

    // accumulated argument change along [z1, z2].  The endpoint difference
    // alone aliases whenever the true change is near a multiple of 2 pi, so
    // every piece is checked against its two halves and refined until the
    // midpoint reveals no extra turning.
    double seg_arg(cplx z1, cplx z2, cplx f1, cplx f2, int depth) const {
        if (std::abs(f1) == 0.0 || std::abs(f2) == 0.0)
            throw numerical_error("transfer matrix: zero of T22 on the contour");
        const cplx zm = 0.5 * (z1 + z2);
        const cplx fm = f(zm);
        if (std::abs(fm) == 0.0)
            throw numerical_error("transfer matrix: zero of T22 on the contour");
        const double d = std::arg(f2 / f1);
        const double dl = std::arg(fm / f1);
        const double dr = std::arg(f2 / fm);
        const double half = 0.5 * std::numbers::pi;
        if (std::abs(d) < half && std::abs(dl) < half && std::abs(dr) < half &&
            std::abs(dl + dr - d) < 1e-9)
            return dl + dr;
        if (depth <= 0)
            throw numerical_error(
                "transfer matrix: winding did not stabilize under refinement");
        return seg_arg(z1, zm, f1, fm, depth - 1) + seg_arg(zm, z2, fm, f2, depth - 1);
    }

    // one box side, forced through a uniform base split so that smooth
    // whole-turn argument changes cannot hide between the endpoints
    double edge_arg(cplx a, cplx b) const {
        const int base = 64;
        double total = 0.0;
        cplx zp = a;
        cplx fp = f(a);
        for (int k = 1; k <= base; ++k) {
            const cplx zk = a + (b - a) * (double(k) / base);
            const cplx fk = f(zk);
            total += seg_arg(zp, zk, fp, fk, 40);
            zp = zk;
            fp = fk;
        }
        return total;
    }

    int winding(const TmBox& b) const {
        const cplx c1(b.re_lo, b.im_lo);
        const cplx c2(b.re_hi, b.im_lo);
        const cplx c3(b.re_hi, b.im_hi);
        const cplx c4(b.re_lo, b.im_hi);
        const double total = edge_arg(c1, c2) + edge_arg(c2, c3) +
                             edge_arg(c3, c4) + edge_arg(c4, c1);
        const double w = total / (2.0 * std::numbers::pi);
        const double r = std::round(w);
        if (std::abs(w - r) > 0.25)
            throw numerical_error("transfer matrix: non-integer winding number");
        if (r < 0.0)
            throw numerical_error(
                "transfer matrix: negative winding; T22 should be zero-free of poles");
        return int(r);
    }

    bool newton(cplx& z, const TmBox& b) const {
        const double scale =
            std::max({1.0, std::abs(b.re_hi), std::abs(b.im_lo)});
        const double diag = std::hypot(b.re_hi - b.re_lo, b.im_hi - b.im_lo);
        const double step_h = 1e-7 * diag;
        const double margin = 0.1 * diag;
        for (int it = 0; it < 80; ++it) {
            const cplx fv = f(z);
            const cplx der =
                (f(z + step_h) - f(z - step_h)) / (2.0 * step_h);
            if (std::abs(der) == 0.0) return false;
            const cplx dz = fv / der;
            z -= dz;
            if (z.real() < b.re_lo - margin || z.real() > b.re_hi + margin ||
                z.imag() < b.im_lo - margin || z.imag() > b.im_hi + margin)
                return false;
            if (std::abs(dz) <= 1e-15 * scale) return true;
        }
        return false;
    }

    void collect(const TmBox& b, int w, int depth, std::vector<cplx>& roots) const {
        if (w == 0) return;
        const double diag = std::hypot(b.re_hi - b.re_lo, b.im_hi - b.im_lo);
        const double scale =
            std::max({1.0, std::abs(b.re_hi), std::abs(b.im_lo)});
        if (w == 1) {
            cplx z(0.5 * (b.re_lo + b.re_hi), 0.5 * (b.im_lo + b.im_hi));
            if (newton(z, b)) {
                roots.push_back(z);
                return;
            }
        }
        if (diag <= 1e-12 * scale) {
            // unresolved cluster: report the center with multiplicity
            const cplx c(0.5 * (b.re_lo + b.re_hi), 0.5 * (b.im_lo + b.im_hi));
            for (int i = 0; i < w; ++i) roots.push_back(c);
            return;
        }
        if (depth <= 0)
            throw numerical_error(
                "transfer matrix: subdivision depth exhausted before roots isolated");
        // split along the longer side; nudge the cut if a zero sits on it
        const bool split_re = (b.re_hi - b.re_lo) >= (b.im_hi - b.im_lo);
        for (double frac : {0.5, 0.53, 0.47}) {
            TmBox lo = b, hi = b;
            if (split_re) {
                const double cut = b.re_lo + frac * (b.re_hi - b.re_lo);
                lo.re_hi = cut;
                hi.re_lo = cut;
            } else {
                const double cut = b.im_lo + frac * (b.im_hi - b.im_lo);
                lo.im_hi = cut;
                hi.im_lo = cut;
            }
            int wlo, whi;
            try {
                wlo = winding(lo);
                whi = winding(hi);
            } catch (const numerical_error&) {
                continue;
            }
            if (wlo + whi != w)
                throw numerical_error(
                    "transfer matrix: winding numbers fail to add up under subdivision");
            collect(lo, wlo, depth - 1, roots);
            collect(hi, whi, depth - 1, roots);
            return;
        }
        throw numerical_error(
            "transfer matrix: could not place a zero-free subdivision cut");
    }
};

} // namespace

cplx transfer_t22(const Potential1D& V, double hbar, cplx z, SheetBranch branch) {
    if (!(hbar > 0.0)) throw std::invalid_argument("transfer matrix: hbar must be positive");
    const Profile p = make_profile(V);
    return t22_eval(p, hbar, z, branch);
}

int transfer_winding(const Potential1D& V, double hbar, const TmBox& box,
                     SheetBranch branch) {
    if (!(hbar > 0.0)) throw std::invalid_argument("transfer matrix: hbar must be positive");
    check_box(box, branch);
    const Profile p = make_profile(V);
    Tracker tr{&p, hbar, branch};
    return tr.winding(box);
}

std::vector<Resonance> transfer_matrix_resonances(const Potential1D& V, double hbar,
                                                  const TmBox& box,
                                                  SheetBranch branch) {
    if (!(hbar > 0.0)) throw std::invalid_argument("transfer matrix: hbar must be positive");
    check_box(box, branch);
    const Profile p = make_profile(V);
    Tracker tr{&p, hbar, branch};
    const int w = tr.winding(box);
    std::vector<cplx> roots;
    tr.collect(box, w, 120, roots);
    if (int(roots.size()) != w)
        throw numerical_error(
            "transfer matrix: root count disagrees with the boundary winding number");
    std::vector<Resonance> out;
    out.reserve(roots.size());
    for (const cplx& z : roots) {
        const double width = std::abs(z.imag());
        const double tau = width > 0.0 ? hbar / (2.0 * width)
                                       : std::numeric_limits<double>::infinity();
        out.push_back(Resonance{z, tau});
    }
    std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
    return out;
}

} // namespace wcl
