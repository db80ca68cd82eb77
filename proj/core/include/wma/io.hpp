#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wma {

/// Whole-file read. Throws InvalidArgument when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`, so readers
/// never see a partial file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Parses one JSON value per non-empty line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace wma
