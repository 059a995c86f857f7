#pragma once

#include <string>

namespace dualgeo {

/// Shortest text that round-trips a double (17 significant digits).
std::string format_double(double v);

/// Writes to `path + ".tmp"` and renames over `path`; throws Error on failure.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace dualgeo
