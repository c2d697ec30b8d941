#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sec {

std::string sha256_hex(std::string_view data);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// True if `s` starts/ends with the given piece (C++20 has these on
// string_view; kept here so call sites read uniformly with the rest).
bool starts_with(std::string_view s, std::string_view piece);
bool ends_with(std::string_view s, std::string_view piece);

// Case-insensitive find over ASCII; npos when absent.
size_t ifind(std::string_view haystack, std::string_view needle, size_t from = 0);

std::vector<std::string> split(std::string_view s, std::string_view sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// English word for small counts ("one".."twenty"), digits beyond that.
std::string count_word(int n);

std::string read_file(const std::string& path);
// write-to-temp then rename, so readers never observe a partial file
void atomic_write_file(const std::string& path, std::string_view content);
void append_line(const std::string& path, std::string_view line);

std::string iso8601_now();

// Non-empty lines (lines containing at least one non-whitespace char).
int count_nonempty_lines(std::string_view text);

}  // namespace sec
