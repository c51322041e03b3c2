#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace wellcap::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// {"path": <file name>, "sha256": <digest>}
nlohmann::json file_entry(const std::filesystem::path& path);

/// NaN and infinities become null.
nlohmann::json number_or_null(double v);

/// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace wellcap::cli
