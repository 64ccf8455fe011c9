#ifndef QFFGP_TOOLS_CONFIG_HPP
#define QFFGP_TOOLS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qffgp/errors.hpp"

namespace qffgp::cli {

/// Configuration error: malformed file, unknown key, bad value. Messages
/// carry "<file>:<line>:" locations. Mapped to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// key = value configuration with [section] headers, '#' comments and
/// line-precise validation errors.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& name);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  long get_int(const std::string& section, const std::string& key) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  /// Integer lists: "1,2,3", ranges "0..24", strided ranges "8:128:8".
  std::vector<long> get_int_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

  /// Rejects keys outside the allowed set (typo guard); section may be absent.
  void require_keys(const std::string& section, const std::vector<std::string>& allowed) const;

  /// Canonical "section.key = value" dump (sorted); input to the config hash.
  std::string canonical() const;

  const std::string& name() const { return name_; }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string name_;
  std::map<std::string, std::map<std::string, Entry>> sections_;

  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& require(const std::string& section, const std::string& key) const;
};

/// FNV-1a hash of the canonical config text, hex-encoded; the provenance
/// column in every output table.
std::string config_hash(const Config& config);

}  // namespace qffgp::cli

#endif  // QFFGP_TOOLS_CONFIG_HPP
