#include "pradkit/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "pradkit/error.hpp"

namespace pradkit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, const std::string& what) {
  const auto t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(what + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const auto item = trim(text.substr(start, end - start));
    if (!item.empty()) {
      out.emplace_back(item);
    }
    start = end + 1;
  }
  return out;
}

std::string format_number(double value) { return fmt::format("{}", value); }

KeyValueFile KeyValueFile::parse(std::string_view text, std::string_view origin) {
  KeyValueFile kv;
  kv.origin_ = std::string(origin);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key = value", origin, line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError(fmt::format("{}:{}: empty key", origin, line_no));
    }
    if (!kv.entries_.emplace(key, value).second) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
    }
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << to_string();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void KeyValueFile::merge(const KeyValueFile& other) {
  for (const auto& [key, value] : other.entries_) {
    entries_[key] = value;
  }
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, std::string fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? std::move(fallback) : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  return parse_double(get_string(key), origin_ + ": " + key);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return find_double(key).value_or(fallback);
}

std::optional<double> KeyValueFile::find_double(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end() || trim(it->second).empty()) {
    return std::nullopt;
  }
  return parse_double(it->second, origin_ + ": " + key);
}

long long KeyValueFile::get_int(const std::string& key) const {
  const auto text = std::string(trim(get_string(key)));
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(origin_ + ": " + key + ": expected an integer, got '" + text + "'");
  }
  return value;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  return contains(key) ? get_int(key) : fallback;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  if (!contains(key)) {
    return fallback;
  }
  const auto v = std::string(trim(get_string(key)));
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    return false;
  }
  throw ConfigError(origin_ + ": " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(key))) {
    out.push_back(parse_double(item, origin_ + ": " + key));
  }
  return out;
}

std::vector<std::string> KeyValueFile::get_strings(const std::string& key) const {
  return split_list(get_string(key));
}

void KeyValueFile::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    if (!known.contains(key)) {
      throw ConfigError(origin_ + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace pradkit
