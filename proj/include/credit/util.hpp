#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace credit {

using Json = nlohmann::ordered_json;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Seeded random stream. Every draw is derived from raw mt19937_64 output so
/// results do not depend on the standard library's distribution classes.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Rejection sampling, n > 0.
    std::size_t index(std::size_t n);

    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// ============================================================================
// Text formatting
// ============================================================================

/// Shortest decimal text that round-trips to the same double.
std::string format_shortest(double value);

/// printf("%.17g").
std::string format_g17(double value);

/// Serializes JSON with every floating value written as %.17g; non-finite
/// floats become null. Output is deterministic for a given document.
std::string dump_json(const Json& doc, int indent = 2);

// ============================================================================
// CSV
// ============================================================================

/// Splits one CSV record. Double-quoted fields with "" escapes are honored.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads a CSV file into header + records. Blank lines are skipped and a
/// trailing '\r' is stripped.
struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvFile read_csv(const std::filesystem::path& path);
CsvFile parse_csv_text(std::string_view text, const std::string& source = "<memory>");

/// Strict double parse of the whole token; false on failure or empty text.
bool parse_double(std::string_view text, double& out);
bool parse_int64(std::string_view text, std::int64_t& out);

// ============================================================================
// Files
// ============================================================================

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);
Json read_json(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers must write only to per-index state.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace credit
