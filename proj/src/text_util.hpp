#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dsm {

std::string_view trim(std::string_view s);
// Splits on '\n', dropping a trailing '\r' from each line. A final newline
// does not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased tokens: alphanumeric runs (bytes >= 0x80 included) and single
// punctuation characters. Whitespace separates tokens and is dropped.
std::vector<std::string> tokenize(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Shortest decimal form that round-trips the double.
std::string format_double(double v);

}  // namespace dsm
