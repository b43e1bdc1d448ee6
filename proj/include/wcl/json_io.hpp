#ifndef WCL_JSON_IO_HPP
#define WCL_JSON_IO_HPP

// Deterministic serialization.  Reports must be byte-identical across
// runs and thread counts, which rules out iostream default formatting
// and unordered keys: objects keep insertion order (nlohmann ordered
// json) and every double is printed with a fixed "%.17g", enough digits
// to round-trip exactly.  Wall-clock metadata never goes into a report,
// only into its .meta.json sidecar.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wcl {

using ojson = nlohmann::ordered_json;

// Fixed-format rendering of one double; non-finite values become "null".
std::string format_double(double v);

// Render a JSON tree with 2-space indentation and fixed number formatting.
std::string json_emit(const ojson& j);
// Single-line rendering, used for hashing canonical parameter blocks.
std::string json_emit_compact(const ojson& j);

std::uint64_t fnv1a64(std::string_view s);
// fnv1a64 as fixed-width lowercase hex.
std::string hash_hex(std::string_view s);

// CSV with a header row, "\n" line endings, numbers preformatted by the
// caller (use format_double).
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

// Write via a temporary in the same directory plus rename, so readers
// never observe a half-written report.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

} // namespace wcl

#endif
