#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pradkit {

/// Flat `key = value` text document used for frame sidecars, phantom specs,
/// experiment descriptors and CLI configs.
///
/// Blank lines and lines starting with `#` are ignored. Keys are unique.
/// Serialization writes keys in sorted order so output is reproducible.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::string_view text, std::string_view origin = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);

  void save(const std::filesystem::path& path) const;
  std::string to_string() const;

  bool contains(const std::string& key) const { return entries_.contains(key); }
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void erase(const std::string& key) { entries_.erase(key); }
  /// Copies every entry of `other` over this one.
  void merge(const KeyValueFile& other);

  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> find_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  /// Throws ConfigError naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_ = "<config>";
};

/// Splits on commas and trims whitespace; empty items are dropped.
std::vector<std::string> split_list(std::string_view text);

/// Shortest round-trip decimal representation of a double.
std::string format_number(double value);

}  // namespace pradkit
