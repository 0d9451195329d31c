#ifndef REACFUSE_INI_HPP
#define REACFUSE_INI_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace reacfuse {

// Sectioned key=value configuration. '#' and ';' start comments. Values are
// stored verbatim; typed access parses on demand.
class Ini {
public:
  static Ini parse(const std::string& text);
  static Ini load(const std::filesystem::path& p);

  bool has(const std::string& sec, const std::string& key) const;
  const std::string& get(const std::string& sec, const std::string& key) const;
  void set(const std::string& sec, const std::string& key, const std::string& value);

  std::string get_str(const std::string& sec, const std::string& key) const { return get(sec, key); }
  std::int64_t get_int(const std::string& sec, const std::string& key) const;
  std::uint64_t get_u64(const std::string& sec, const std::string& key) const;
  double get_real(const std::string& sec, const std::string& key) const;
  bool get_bool(const std::string& sec, const std::string& key) const;

  // Canonical serialization: sections and keys sorted, one key=value per line.
  std::string dump() const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Declares the complete key set a command understands, with defaults.
// resolve() overlays user values and rejects anything undeclared.
class ConfigSchema {
public:
  void declare(const std::string& sec, const std::string& key, const std::string& default_value);
  Ini resolve(const Ini& user) const;

private:
  std::map<std::string, std::map<std::string, std::string>> defaults_;
};

}  // namespace reacfuse

#endif
