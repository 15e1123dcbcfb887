#include <fstream>
#include <sstream>

#include "entropy_lab/error.hpp"
#include "entropy_lab/experiments.hpp"

namespace entropy_lab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigError,
            "line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    require(!key.empty(), ErrorCode::ConfigError, "line " + std::to_string(number) + ": empty key");
    require(!value.empty(), ErrorCode::ConfigError,
            "line " + std::to_string(number) + ": empty value for " + key);
    c.set(key, value);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::ConfigError, "cannot read config " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  return parse(text.str());
}

void Config::set(const std::string& key, const std::string& value) {
  require(!has(key), ErrorCode::ConfigError, "duplicate key " + key);
  entries_.emplace_back(key, value);
}

bool Config::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const std::string& Config::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw Error(ErrorCode::ConfigError, "missing key " + key);
}

}  // namespace entropy_lab
