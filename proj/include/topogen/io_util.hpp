#pragma once

#include <string>

namespace topogen {

// Whole-file read; throws IoError if the file cannot be opened.
std::string read_file(const std::string& path);

// Writes via a temp file in the same directory and renames into place.
void write_file_atomic(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

}  // namespace topogen
