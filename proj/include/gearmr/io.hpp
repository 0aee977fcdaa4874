#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gearmr {

/// Write `content` to a sibling temporary file and rename it over `path`,
/// so readers never observe a partial file. Throws Error(Io).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace gearmr
