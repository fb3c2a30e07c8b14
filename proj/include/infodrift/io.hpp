#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace infodrift {

// Shortest round-trip decimal form; locale independent.
std::string format_double(double value);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& target, std::string_view contents);

}  // namespace infodrift
