#include "wcl/open_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wcl {

OpenMapSpec::OpenMapSpec(int branches, std::vector<int> kept_branches)
    : M(branches), kept(std::move(kept_branches)) {
    validate();
}

double OpenMapSpec::log_expansion() const { return std::log(double(M)); }

bool OpenMapSpec::is_kept(int branch) const {
    return std::binary_search(kept.begin(), kept.end(), branch);
}

void OpenMapSpec::validate() const {
    if (M < 2) throw std::invalid_argument("OpenMapSpec: branch count must be >= 2");
    if (kept.empty()) throw std::invalid_argument("OpenMapSpec: at least one kept branch");
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] < 0 || kept[i] >= M)
            throw std::invalid_argument("OpenMapSpec: kept branch out of range");
        if (i > 0 && kept[i] <= kept[i - 1])
            throw std::invalid_argument("OpenMapSpec: kept branches must be strictly increasing");
    }
}

ojson OpenMapSpec::to_json() const {
    ojson j;
    j["M"] = M;
    j["keep"] = kept;
    return j;
}

OpenMapSpec closed_map(int M) {
    std::vector<int> all(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) all[std::size_t(i)] = i;
    return OpenMapSpec(M, std::move(all));
}

DampingField DampingField::per_branch(std::vector<double> b) {
    DampingField f;
    f.kind = Kind::per_branch;
    f.values = std::move(b);
    return f;
}

DampingField DampingField::sampled(std::vector<double> samples) {
    DampingField f;
    f.kind = Kind::sampled;
    f.values = std::move(samples);
    return f;
}

void DampingField::validate(int M) const {
    if (kind == Kind::per_branch && values.size() != std::size_t(M))
        throw std::invalid_argument("DampingField: need one value per branch");
    if (kind == Kind::sampled && values.size() < 2)
        throw std::invalid_argument("DampingField: need at least 2 samples");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("DampingField: values must be finite and >= 0");
}

double DampingField::at(double x, int M) const {
    if (kind == Kind::per_branch) {
        int i = int(std::floor(x * M));
        if (i < 0) i = 0;
        if (i >= M) i = M - 1;
        return values[std::size_t(i)];
    }
    // periodic linear interpolation on the sample grid
    const std::size_t m = values.size();
    double t = (x - std::floor(x)) * double(m);
    std::size_t i = std::size_t(t);
    if (i >= m) i = m - 1;
    const double frac = t - double(i);
    const double v0 = values[i];
    const double v1 = values[(i + 1) % m];
    return v0 + frac * (v1 - v0);
}

double DampingField::branch_value(int i) const {
    if (kind != Kind::per_branch)
        throw std::invalid_argument("DampingField: branch_value needs per-branch damping");
    if (i < 0 || std::size_t(i) >= values.size())
        throw std::invalid_argument("DampingField: branch out of range");
    return values[std::size_t(i)];
}

double DampingField::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / double(values.size());
}

double DampingField::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

double DampingField::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

double DampingField::min_kept(const OpenMapSpec& map) const {
    if (kind != Kind::per_branch)
        throw std::invalid_argument("DampingField: kept-branch extremes need per-branch damping");
    double m = branch_value(map.kept.front());
    for (int i : map.kept) m = std::min(m, branch_value(i));
    return m;
}

double DampingField::max_kept(const OpenMapSpec& map) const {
    if (kind != Kind::per_branch)
        throw std::invalid_argument("DampingField: kept-branch extremes need per-branch damping");
    double m = branch_value(map.kept.front());
    for (int i : map.kept) m = std::max(m, branch_value(i));
    return m;
}

ojson DampingField::to_json() const {
    ojson j;
    j[kind == Kind::per_branch ? "per_branch" : "sampled"] = values;
    return j;
}

} // namespace wcl
