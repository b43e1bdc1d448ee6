#include "wcl/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wcl {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void emit(const ojson& j, std::string& out, int depth, bool pretty) {
    const std::string pad = pretty ? std::string(std::size_t(2 * (depth + 1)), ' ') : "";
    const std::string close_pad = pretty ? std::string(std::size_t(2 * depth), ' ') : "";
    const char* nl = pretty ? "\n" : "";
    switch (j.type()) {
    case ojson::value_t::object: {
        if (j.empty()) { out += "{}"; return; }
        out += "{";
        out += nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) { out += ","; out += nl; }
            first = false;
            out += pad;
            out += ojson(it.key()).dump();
            out += pretty ? ": " : ":";
            emit(it.value(), out, depth + 1, pretty);
        }
        out += nl;
        out += close_pad;
        out += "}";
        return;
    }
    case ojson::value_t::array: {
        if (j.empty()) { out += "[]"; return; }
        out += "[";
        out += nl;
        bool first = true;
        for (const auto& el : j) {
            if (!first) { out += ","; out += nl; }
            first = false;
            out += pad;
            emit(el, out, depth + 1, pretty);
        }
        out += nl;
        out += close_pad;
        out += "]";
        return;
    }
    case ojson::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        // integers, strings (escaped), booleans, null
        out += j.dump();
        return;
    }
}

} // namespace

std::string json_emit(const ojson& j) {
    std::string out;
    emit(j, out, 0, true);
    out += "\n";
    return out;
}

std::string json_emit_compact(const ojson& j) {
    std::string out;
    emit(j, out, 0, false);
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::string_view s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ",";
        out += header[i];
    }
    out += "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("csv_table: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += row[i];
        }
        out += "\n";
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
        f.write(content.data(), std::streamsize(content.size()));
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace wcl
