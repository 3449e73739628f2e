#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace flowpick {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void append_text_file(const std::filesystem::path& path, const std::string& text);

/// Non-empty lines; a trailing '\r' is stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace flowpick
