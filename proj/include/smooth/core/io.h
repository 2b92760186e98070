#ifndef SMOOTH_CORE_IO_H_
#define SMOOTH_CORE_IO_H_

#include <filesystem>
#include <string>

namespace smooth {

// Writes to a sibling temporary file, then renames it over the target.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace smooth

#endif  // SMOOTH_CORE_IO_H_
