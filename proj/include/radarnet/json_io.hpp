#pragma once

#include <json.hpp>

#include <string>

namespace radarnet {

// Writes to `path`.tmp then renames, so readers never see a partial file.
void write_json_atomically(const nlohmann::json& j, const std::string& path);
// Throws ConfigError(what, ...) when the file is missing or malformed.
nlohmann::json read_json_file(const std::string& path, const std::string& what);

}  // namespace radarnet
