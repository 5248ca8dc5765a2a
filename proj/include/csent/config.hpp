#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

namespace csent {

/// Flat `key = value` settings with layered sources.
///
/// Keys must be declared up front (with their default); anything else found
/// in a file or override is rejected, which catches typos in config files.
/// Precedence: override > file > default.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  void declare(const std::string& key, std::string default_value);
  bool declared(const std::string& key) const { return defaults_.contains(key); }

  /// Parses `key = value` lines; '#' starts a comment line, blank lines are
  /// skipped. Throws ParseError on malformed lines or undeclared keys.
  void load_file(const std::filesystem::path& path);
  void load_string(std::string_view content, const std::string& source);

  /// Command-line override; throws UsageError for undeclared keys.
  void set_override(const std::string& key, std::string value);

  std::string get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Writes the fully resolved settings, one `key = value  # source` per line.
  void echo(std::ostream& out, std::string_view prefix = "# ") const;

 private:
  struct Value {
    std::string text;
    std::string source;
  };
  Value resolve(const std::string& key) const;

  std::map<std::string, std::string> defaults_;
  std::map<std::string, Value> file_values_;
  std::map<std::string, Value> overrides_;
};

}  // namespace csent
