#include "ergoseg/config.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>

#include "ergoseg/error.hpp"

namespace ergoseg {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
  ConfigFile config;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[' && stripped.back() == ']') {
      section = trim(stripped.substr(1, stripped.size() - 2));
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(Errc::config_error,
           "config line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty())
      fail(Errc::config_error, "empty key on line " + std::to_string(line_no));
    const std::string full = section.empty() ? key : section + "." + key;
    config.values_[full] = trim(stripped.substr(eq + 1));
  }
  return config;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open config '" + path + "'");
  return parse(in);
}

std::string ConfigFile::get(const std::string& key,
                            const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end != it->second.c_str() + it->second.size())
    fail(Errc::config_error, "config key '" + key + "' is not a number");
  return v;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  return static_cast<int>(v);
}

}  // namespace ergoseg
