#include "radarnet/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "radarnet/scenario.hpp"

namespace radarnet {

void write_json_atomically(const nlohmann::json& j, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << j.dump(1) << "\n";
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what, std::string("parse error in ") + path + ": " + e.what());
  }
}

}  // namespace radarnet
