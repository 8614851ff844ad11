#pragma once

#include <string>

namespace spherebispec::detail {

// Writes via a sibling temp file and rename so readers never see a torn file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace spherebispec::detail
