#include "wcl/res1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wcl {

Potential1D Potential1D::gaussian(std::vector<GaussianBump> bumps) {
    Potential1D v;
    v.kind = Kind::gaussian_barriers;
    v.bumps = std::move(bumps);
    v.validate();
    return v;
}

Potential1D Potential1D::piecewise(std::vector<double> edges, std::vector<double> heights) {
    Potential1D v;
    v.kind = Kind::piecewise_constant;
    v.edges = std::move(edges);
    v.heights = std::move(heights);
    v.validate();
    return v;
}

void Potential1D::validate() const {
    if (kind == Kind::gaussian_barriers) {
        if (bumps.empty())
            throw std::invalid_argument("Potential1D: gaussian potential needs bumps");
        for (const GaussianBump& b : bumps) {
            if (!std::isfinite(b.center) || !std::isfinite(b.height) || !std::isfinite(b.width))
                throw std::invalid_argument("Potential1D: bump parameters must be finite");
            if (b.width <= 0.0)
                throw std::invalid_argument("Potential1D: bump width must be positive");
        }
    } else {
        if (edges.size() < 2)
            throw std::invalid_argument("Potential1D: piecewise potential needs at least 2 edges");
        if (heights.size() + 1 != edges.size())
            throw std::invalid_argument("Potential1D: need one height per interval");
        for (double e : edges)
            if (!std::isfinite(e))
                throw std::invalid_argument("Potential1D: edges must be finite");
        for (double h : heights)
            if (!std::isfinite(h))
                throw std::invalid_argument("Potential1D: heights must be finite");
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (!(edges[i] > edges[i - 1]))
                throw std::invalid_argument("Potential1D: edges must be strictly increasing");
    }
}

double Potential1D::value(double x) const {
    if (kind == Kind::gaussian_barriers) {
        double v = 0.0;
        for (const GaussianBump& b : bumps) {
            const double u = (x - b.center) / b.width;
            v += b.height * std::exp(-u * u);
        }
        return v;
    }
    if (x < edges.front() || x >= edges.back()) return 0.0;
    // half-open intervals [e_i, e_{i+1})
    const std::size_t i =
        std::size_t(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
    return heights[std::min(i, heights.size() - 1)];
}

cplx Potential1D::value_scaled(cplx z) const {
    if (kind != Kind::gaussian_barriers)
        throw std::invalid_argument(
            "Potential1D: analytic continuation needs the gaussian kind");
    cplx v = 0.0;
    for (const GaussianBump& b : bumps) {
        const cplx u = (z - b.center) / b.width;
        v += b.height * std::exp(-u * u);
    }
    return v;
}

double Potential1D::support_radius(double tail) const {
    if (!(tail > 0.0))
        throw std::invalid_argument("Potential1D: tail threshold must be positive");
    if (kind == Kind::piecewise_constant)
        return std::max(std::abs(edges.front()), std::abs(edges.back()));
    double r = 0.0;
    for (const GaussianBump& b : bumps) {
        const double amp = std::abs(b.height);
        const double reach =
            amp <= tail ? 0.0 : b.width * std::sqrt(std::log(amp / tail));
        r = std::max(r, std::abs(b.center) + reach);
    }
    return r;
}

double Potential1D::max_height() const {
    double m = 0.0;
    if (kind == Kind::gaussian_barriers) {
        for (const GaussianBump& b : bumps) m = std::max(m, b.height);
    } else {
        for (double h : heights) m = std::max(m, h);
    }
    return m;
}

ojson Potential1D::to_json() const {
    ojson j;
    if (kind == Kind::gaussian_barriers) {
        j["kind"] = "gaussian_barriers";
        ojson arr = ojson::array();
        for (const GaussianBump& b : bumps) {
            ojson e;
            e["center"] = b.center;
            e["height"] = b.height;
            e["width"] = b.width;
            arr.push_back(std::move(e));
        }
        j["bumps"] = std::move(arr);
    } else {
        j["kind"] = "piecewise_constant";
        j["edges"] = edges;
        j["heights"] = heights;
    }
    return j;
}

void ScalingContour::validate() const {
    if (!(theta > 0.0) || !(theta < std::atan(1.0)))
        throw std::invalid_argument("ScalingContour: theta must lie in (0, pi/4)");
    if (!(r0 > 0.0) || !std::isfinite(r0))
        throw std::invalid_argument("ScalingContour: deformation onset must be positive");
    if (!(smoothing_width > 0.0) || !(smoothing_width <= r0))
        throw std::invalid_argument(
            "ScalingContour: smoothing width must lie in (0, r0]");
}

double ScalingContour::profile(double x) const {
    const double ax = std::abs(x);
    if (ax <= r0) return 0.0;
    if (ax >= r0 + smoothing_width) return x;
    const double t = (ax - r0) / smoothing_width;
    return x * (t * t * (3.0 - 2.0 * t));
}

void CapSpec::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw std::invalid_argument("CapSpec: absorber strength must be positive");
    if (!(r0 > 0.0) || !std::isfinite(r0))
        throw std::invalid_argument("CapSpec: absorber onset must be positive");
}

double CapSpec::weight(double x) const {
    const double d = std::abs(x) - r0;
    return d > 0.0 ? d * d : 0.0;
}

void Grid1D::validate() const {
    if (!(L > 0.0) || !std::isfinite(L))
        throw std::invalid_argument("Grid1D: half-width must be positive");
    if (n < 200) throw std::invalid_argument("Grid1D: need at least 200 subintervals");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
        throw std::invalid_argument("Grid1D: hbar must be positive");
}

namespace {

void check_wavelength(const Grid1D& grid, std::vector<std::string>& warnings) {
    if (grid.hbar / grid.h() < 5.0)
        warnings.push_back("grid spacing does not resolve the de Broglie wavelength "
                           "(hbar/h < 5); refine the grid");
}

} // namespace

BuildResult build_hamiltonian_cap(const Grid1D& grid, const Potential1D& V,
                                  const CapSpec& cap) {
    grid.validate();
    V.validate();
    cap.validate();
    BuildResult out{ComplexMatrix(grid.dim(), grid.dim()), {}};
    check_wavelength(grid, out.warnings);
    if (!(grid.L > 2.0 * cap.r0))
        out.warnings.push_back("domain half-width does not exceed twice the absorber "
                               "onset; absorber zone is truncated");
    const double h = grid.h();
    const double kin = grid.hbar * grid.hbar / (h * h);
    const std::size_t d = grid.dim();
    for (std::size_t i = 0; i < d; ++i) {
        const double xi = grid.x(i);
        out.H(i, i) = cplx(kin + V.value(xi), -cap.eta * cap.weight(xi));
        if (i + 1 < d) {
            out.H(i, i + 1) = -0.5 * kin;
            out.H(i + 1, i) = -0.5 * kin;
        }
    }
    return out;
}

BuildResult build_hamiltonian_scaled(const Grid1D& grid, const Potential1D& V,
                                     double theta) {
    grid.validate();
    V.validate();
    if (V.kind != Potential1D::Kind::gaussian_barriers)
        throw std::invalid_argument(
            "build_hamiltonian_scaled: complex scaling needs an analytic (gaussian) "
            "potential; use the absorbing-potential path for piecewise data");
    if (!std::isfinite(theta) || theta < 0.0 || theta >= std::atan(1.0))
        throw std::invalid_argument(
            "build_hamiltonian_scaled: theta must lie in [0, pi/4)");
    BuildResult out{ComplexMatrix(grid.dim(), grid.dim()), {}};
    check_wavelength(grid, out.warnings);
    const double h = grid.h();
    const cplx rot = std::exp(cplx(0.0, -2.0 * theta));
    const cplx kin = rot * (grid.hbar * grid.hbar / (h * h));
    const cplx scale = std::exp(cplx(0.0, theta));
    const std::size_t d = grid.dim();
    for (std::size_t i = 0; i < d; ++i) {
        out.H(i, i) = kin + V.value_scaled(scale * grid.x(i));
        if (i + 1 < d) {
            out.H(i, i + 1) = -0.5 * kin;
            out.H(i + 1, i) = -0.5 * kin;
        }
    }
    return out;
}

std::vector<Resonance> resonances_from_eigenvalues(const std::vector<cplx>& eig,
                                                   double e_lo, double e_hi,
                                                   double max_width, double hbar) {
    if (!(e_lo < e_hi))
        throw std::invalid_argument("resonances: energy window is empty");
    if (!(max_width > 0.0) || !(hbar > 0.0))
        throw std::invalid_argument("resonances: max_width and hbar must be positive");
    std::vector<Resonance> out;
    for (const cplx& z : eig) {
        const double width = -z.imag();
        if (z.real() < e_lo || z.real() > e_hi) continue;
        if (!(width > 0.0) || width > max_width * hbar) continue;
        out.push_back(Resonance{z, hbar / (2.0 * width)});
    }
    std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
    return out;
}

std::vector<Resonance> resonances_from_spectrum(const SpectrumRecord& rec,
                                                double e_lo, double e_hi,
                                                double max_width, double hbar) {
    return resonances_from_eigenvalues(rec.eigenvalues, e_lo, e_hi, max_width, hbar);
}

std::vector<Resonance> stable_resonances(const std::vector<Resonance>& primary,
                                         const std::vector<Resonance>& perturbed,
                                         double rel_tol) {
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("stable_resonances: tolerance must be positive");
    std::vector<Resonance> out;
    for (const Resonance& r : primary) {
        double best = std::numeric_limits<double>::infinity();
        for (const Resonance& p : perturbed) best = std::min(best, std::abs(r.z - p.z));
        if (best <= rel_tol * std::abs(r.z)) out.push_back(r);
    }
    return out;
}

std::vector<Resonance> narrowest_resonances(std::vector<Resonance> list,
                                            std::size_t count) {
    std::sort(list.begin(), list.end(), [](const Resonance& a, const Resonance& b) {
        const double wa = std::abs(a.z.imag());
        const double wb = std::abs(b.z.imag());
        if (wa != wb) return wa < wb;
        return a.z.real() < b.z.real();
    });
    if (list.size() > count) list.resize(count);
    std::sort(list.begin(), list.end(), [](const Resonance& a, const Resonance& b) {
        return a.z.real() < b.z.real();
    });
    return list;
}

} // namespace wcl
