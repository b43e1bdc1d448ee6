#include "wcl/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wcl {

bool canonical_less(const cplx& a, const cplx& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

void canonical_sort(std::vector<cplx>& eigs) {
    std::sort(eigs.begin(), eigs.end(), canonical_less);
}

SpectrumRecord make_record(std::size_t n, ojson builder, std::vector<cplx> eigs) {
    if (eigs.size() != n)
        throw std::domain_error("make_record: eigenvalue count does not match dimension");
    for (const cplx& z : eigs)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::domain_error("make_record: non-finite eigenvalue");
    canonical_sort(eigs);
    SpectrumRecord rec;
    rec.n = n;
    rec.builder = std::move(builder);
    rec.params_hash = hash_hex(json_emit_compact(rec.builder));
    rec.eigenvalues = std::move(eigs);
    return rec;
}

std::string record_to_json_text(const SpectrumRecord& rec) {
    ojson j;
    j["n"] = rec.n;
    j["builder"] = rec.builder;
    j["params_hash"] = rec.params_hash;
    ojson evs = ojson::array();
    for (const cplx& z : rec.eigenvalues) {
        // floats forced: format_double handles the rendering
        evs.push_back(ojson::array({double(z.real()), double(z.imag())}));
    }
    j["eigenvalues"] = std::move(evs);
    return json_emit(j);
}

SpectrumRecord record_from_json_text(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const std::exception& e) {
        throw std::domain_error(std::string("spectrum record: parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::domain_error("spectrum record: not an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "n" && k != "builder" && k != "params_hash" && k != "eigenvalues")
            throw std::domain_error("spectrum record: unknown field '" + k + "'");
    }
    if (!j.contains("n") || !j.contains("builder") || !j.contains("params_hash")
        || !j.contains("eigenvalues"))
        throw std::domain_error("spectrum record: missing field");
    if (!j["n"].is_number_unsigned() && !j["n"].is_number_integer())
        throw std::domain_error("spectrum record: n must be an integer");

    SpectrumRecord rec;
    rec.n = j["n"].get<std::size_t>();
    rec.builder = j["builder"];
    rec.params_hash = j["params_hash"].get<std::string>();

    const ojson& evs = j["eigenvalues"];
    if (!evs.is_array() || evs.size() != rec.n)
        throw std::domain_error("spectrum record: eigenvalue count does not match n");
    rec.eigenvalues.reserve(rec.n);
    for (const auto& e : evs) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw std::domain_error("spectrum record: eigenvalue entries must be [re, im]");
        const cplx z(e[0].get<double>(), e[1].get<double>());
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::domain_error("spectrum record: non-finite eigenvalue");
        rec.eigenvalues.push_back(z);
    }
    for (std::size_t i = 1; i < rec.eigenvalues.size(); ++i)
        if (canonical_less(rec.eigenvalues[i], rec.eigenvalues[i - 1]))
            throw std::domain_error("spectrum record: eigenvalues not in canonical order");
    return rec;
}

double map_decay_rate(const cplx& lambda) { return -std::log(std::abs(lambda)); }

double map_lifetime(const cplx& lambda) {
    const double g = map_decay_rate(lambda);
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * g);
}

} // namespace wcl
