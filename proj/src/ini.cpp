#include "reacfuse/ini.hpp"

#include <cstdlib>
#include <sstream>

#include "reacfuse/errors.hpp"
#include "reacfuse/io.hpp"

namespace reacfuse {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Ini Ini::parse(const std::string& text) {
  Ini ini;
  std::istringstream in(text);
  std::string line;
  std::string sec;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line = line.substr(0, cpos);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("BadSection", "malformed section header at line " + std::to_string(lineno));
      sec = strip(line.substr(1, line.size() - 2));
      ini.sections_.try_emplace(sec);  // allow empty sections
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("BadLine", "expected key=value at line " + std::to_string(lineno));
    std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("BadLine", "empty key at line " + std::to_string(lineno));
    ini.sections_[sec][key] = val;
  }
  return ini;
}

Ini Ini::load(const std::filesystem::path& p) { return parse(read_file(p)); }

bool Ini::has(const std::string& sec, const std::string& key) const {
  auto s = sections_.find(sec);
  return s != sections_.end() && s->second.count(key) > 0;
}

const std::string& Ini::get(const std::string& sec, const std::string& key) const {
  auto s = sections_.find(sec);
  if (s == sections_.end())
    throw ConfigError("MissingKey", "no section [" + sec + "]");
  auto k = s->second.find(key);
  if (k == s->second.end())
    throw ConfigError("MissingKey", "[" + sec + "] has no key '" + key + "'");
  return k->second;
}

void Ini::set(const std::string& sec, const std::string& key, const std::string& value) {
  sections_[sec][key] = value;
}

std::int64_t Ini::get_int(const std::string& sec, const std::string& key) const {
  const std::string& v = get(sec, key);
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("BadValue", "[" + sec + "] " + key + "=" + v + " is not an integer");
  return x;
}

std::uint64_t Ini::get_u64(const std::string& sec, const std::string& key) const {
  std::int64_t x = get_int(sec, key);
  if (x < 0) throw ConfigError("BadValue", "[" + sec + "] " + key + " must be >= 0");
  return static_cast<std::uint64_t>(x);
}

double Ini::get_real(const std::string& sec, const std::string& key) const {
  const std::string& v = get(sec, key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("BadValue", "[" + sec + "] " + key + "=" + v + " is not a number");
  return x;
}

bool Ini::get_bool(const std::string& sec, const std::string& key) const {
  const std::string& v = get(sec, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("BadValue", "[" + sec + "] " + key + "=" + v + " is not a boolean");
}

std::string Ini::dump() const {
  std::string out;
  for (const auto& [sec, kv] : sections_) {
    out += "[" + sec + "]\n";
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

void ConfigSchema::declare(const std::string& sec, const std::string& key,
                           const std::string& default_value) {
  defaults_[sec][key] = default_value;
}

Ini ConfigSchema::resolve(const Ini& user) const {
  // every user key must be declared
  for (const auto& [sec, kv] : user.sections()) {
    auto ds = defaults_.find(sec);
    if (ds == defaults_.end())
      throw ConfigError("UnknownKey", "unknown section [" + sec + "]");
    for (const auto& [k, v] : kv) {
      if (ds->second.find(k) == ds->second.end())
        throw ConfigError("UnknownKey", "unknown key '" + k + "' in section [" + sec + "]");
    }
  }
  Ini out;
  for (const auto& [sec, kv] : defaults_)
    for (const auto& [k, dflt] : kv)
      out.set(sec, k, user.has(sec, k) ? user.get(sec, k) : dflt);
  return out;
}

}  // namespace reacfuse
