#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace motifscope {

/// Warnings go through one process-wide sink (stderr by default; passing
/// an empty sink restores it).
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

/// Splits one CSV record. Handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string csv_escape(std::string_view field);

/// Runs fn(i) for i in [0, n) over at most `threads` workers. Callers write
/// results by index so output never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Default worker count: hardware concurrency, at least 1.
unsigned default_threads();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Lowercase hex SHA-256 of a byte string / file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

/// splitmix64 step; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform integer in [0, n) from a 64-bit engine. Unlike
/// std::uniform_int_distribution the result is the same on every standard
/// library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Fisher-Yates shuffle built on uniform_below.
template <typename T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Shortest round-trippable decimal rendering of a double.
std::string format_double(double v);

}  // namespace motifscope
