// SPDX-License-Identifier: Apache-2.0
//
// Minimal CSV helpers shared by the loaders and report writers.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artrip::csv {

/// Splits one line on commas. Double-quoted fields may contain commas and
/// escaped quotes (""). A trailing '\r' is ignored.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

/// Writes `content` to `path`, creating parent directories. Throws Error on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace artrip::csv
