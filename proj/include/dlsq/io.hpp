#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dlsq {

/// Shortest round-trippable decimal form of a double ("%.17g").
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace dlsq
