#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace ergoseg {

// Flat "key = value" text with [section] headers; keys are stored as
// "section.key" ("" section for keys above the first header).
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in);
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ergoseg
