#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

namespace stochdp {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double value);

void write_csv_row(std::ostream& out, std::span<const double> values);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace stochdp
