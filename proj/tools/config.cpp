#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qffgp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + text + "'");
  }
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, sep)) out.push_back(trim(tok));
  return out;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(name + ":" + std::to_string(lineno) + ": malformed section header '" +
                          line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": key '" + key +
                        "' outside any [section]");
    }
    auto [it, inserted] = cfg.sections_[section].emplace(key, Entry{value, lineno});
    if (!inserted) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                        "' in section [" + section + "] (first at line " +
                        std::to_string(it->second.line) + ")");
    }
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_string(buf.str(), path);
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? nullptr : &kit->second;
}

const Config::Entry& Config::require(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) {
    throw ConfigError(name_ + ": missing required key '" + key + "' in section [" + section +
                      "]");
  }
  return *e;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  return require(section, key).value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

long Config::get_int(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  return parse_long(e.value, name_ + ":" + std::to_string(e.line));
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_long(e->value, name_ + ":" + std::to_string(e->line)) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  return parse_double(e.value, name_ + ":" + std::to_string(e.line));
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_double(e->value, name_ + ":" + std::to_string(e->line)) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  throw ConfigError(name_ + ":" + std::to_string(e->line) + ": expected a boolean, got '" +
                    e->value + "'");
}

std::vector<long> Config::get_int_list(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  const std::string where = name_ + ":" + std::to_string(e.line);
  std::vector<long> out;
  for (const std::string& item : split(e.value, ',')) {
    if (item.empty()) continue;
    const auto dots = item.find("..");
    const auto colon = item.find(':');
    if (dots != std::string::npos) {
      const long a = parse_long(trim(item.substr(0, dots)), where);
      const long b = parse_long(trim(item.substr(dots + 2)), where);
      if (b < a) throw ConfigError(where + ": descending range '" + item + "'");
      for (long v = a; v <= b; ++v) out.push_back(v);
    } else if (colon != std::string::npos) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) {
        throw ConfigError(where + ": strided range must be start:stop:step, got '" + item + "'");
      }
      const long a = parse_long(parts[0], where);
      const long b = parse_long(parts[1], where);
      const long s = parse_long(parts[2], where);
      if (s <= 0) throw ConfigError(where + ": stride must be positive in '" + item + "'");
      for (long v = a; v <= b; v += s) out.push_back(v);
    } else {
      out.push_back(parse_long(item, where));
    }
  }
  if (out.empty()) throw ConfigError(where + ": empty list for key '" + key + "'");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key) const {
  const Entry& e = require(section, key);
  const std::string where = name_ + ":" + std::to_string(e.line);
  std::vector<double> out;
  for (const std::string& item : split(e.value, ',')) {
    if (!item.empty()) out.push_back(parse_double(item, where));
  }
  if (out.empty()) throw ConfigError(where + ": empty list for key '" + key + "'");
  return out;
}

void Config::require_keys(const std::string& section,
                          const std::vector<std::string>& allowed) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return;
  for (const auto& [key, entry] : sit->second) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(name_ + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                        "' in section [" + section + "]");
    }
  }
}

void Config::fail(const std::string& section, const std::string& key,
                  const std::string& message) const {
  const Entry* e = find(section, key);
  const std::string loc = e ? name_ + ":" + std::to_string(e->line) : name_;
  throw ConfigError(loc + ": " + message);
}

std::string Config::canonical() const {
  std::ostringstream out;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) {
      out << section << "." << key << " = " << entry.value << "\n";
    }
  }
  return out.str();
}

std::string config_hash(const Config& config) {
  const std::string text = config.canonical();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace qffgp::cli
