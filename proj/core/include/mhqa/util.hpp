#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mhqa::util {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower_ascii(std::string_view s);
bool is_ascii_lower(std::string_view s);
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Case-insensitive on ASCII letters only; non-ASCII bytes must match exactly.
std::size_t ifind_last(std::string_view haystack, std::string_view needle);

// UTF-8 <-> code points. Invalid bytes decode to U+FFFD one byte at a time.
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Write to a temp file in the same directory, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view s);

// Fixed-point decimal with half-even tie rounding; used by every emitted table.
std::string format_fixed(double value, int places);

// Runs fn(0..n-1) on up to `workers` threads. Exceptions are rethrown on the
// caller thread (first one wins). workers <= 1 degrades to a plain loop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace mhqa::util
