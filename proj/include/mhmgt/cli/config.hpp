#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mhmgt::cli {

/// Parse or validation failure in a config file. `line` is 1-based, 0 when the
/// problem is not tied to a line (for example a missing required key).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Flat `key = value` settings. Blank lines and `#` comments are ignored; keys
/// may appear once. Values are typed on access, and every key read through a
/// getter is recorded with its resolved value for the output echo.
class Config {
 public:
  Config() = default;
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Command-line override; replaces any file value.
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const;
  std::int64_t get_int(const std::string& key,
                       std::optional<std::int64_t> fallback = std::nullopt) const;
  std::uint64_t get_u64(const std::string& key,
                        std::optional<std::uint64_t> fallback = std::nullopt) const;
  double get_double(const std::string& key,
                    std::optional<double> fallback = std::nullopt) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  /// Comma-separated list.
  std::vector<double> get_doubles(const std::string& key,
                                  std::optional<std::vector<double>> fallback = std::nullopt) const;
  std::vector<std::int64_t> get_ints(
      const std::string& key,
      std::optional<std::vector<std::int64_t>> fallback = std::nullopt) const;

  /// Throws on keys present in the file but never read.
  void reject_unused() const;

  /// Throws a ConfigError citing the line where `key` was set.
  [[noreturn]] void reject(const std::string& key, const std::string& what) const;

  /// Resolved settings in key order, defaults included.
  const std::map<std::string, std::string>& resolved() const noexcept { return resolved_; }
  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for overrides
  };

  const Entry* find(const std::string& key) const;
  void record(const std::string& key, std::string value) const;

  std::string source_ = "<config>";
  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace mhmgt::cli
