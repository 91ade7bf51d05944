#include "mhmgt/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mhmgt::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::optional<T> parse_integral(std::string_view s) {
  T out{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return out;
}

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

Config Config::parse(std::string_view text, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(cfg.source_, line_no, "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(cfg.source_, line_no, "empty key");
    if (key.find_first_of(" \t") != std::string::npos) {
      throw ConfigError(cfg.source_, line_no, "key '" + key + "' contains whitespace");
    }
    if (const auto it = cfg.entries_.find(key); it != cfg.entries_.end()) {
      throw ConfigError(cfg.source_, line_no,
                        "duplicate key '" + key + "' (first set on line " +
                            std::to_string(it->second.line) + ")");
    }
    cfg.entries_[key] = Entry{value, line_no};
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void Config::set(const std::string& key, std::string value) {
  entries_[key] = Entry{std::move(value), 0};
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void Config::reject(const std::string& key, const std::string& what) const {
  const Entry* e = find(key);
  throw ConfigError(source_, e ? e->line : 0, "'" + key + "' " + what);
}

void Config::record(const std::string& key, std::string value) const {
  resolved_[key] = std::move(value);
}

std::string Config::get_string(const std::string& key,
                               std::optional<std::string> fallback) const {
  if (const Entry* e = find(key)) {
    if (e->value.empty()) reject(key, "has an empty value");
    record(key, e->value);
    return e->value;
  }
  if (!fallback) reject(key, "is required");
  record(key, *fallback);
  return *fallback;
}

std::int64_t Config::get_int(const std::string& key,
                             std::optional<std::int64_t> fallback) const {
  if (const Entry* e = find(key)) {
    const auto v = parse_integral<std::int64_t>(e->value);
    if (!v) reject(key, "expects an integer, got '" + e->value + "'");
    record(key, std::to_string(*v));
    return *v;
  }
  if (!fallback) reject(key, "is required");
  record(key, std::to_string(*fallback));
  return *fallback;
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::optional<std::uint64_t> fallback) const {
  if (const Entry* e = find(key)) {
    const auto v = parse_integral<std::uint64_t>(e->value);
    if (!v) reject(key, "expects a non-negative integer, got '" + e->value + "'");
    record(key, std::to_string(*v));
    return *v;
  }
  if (!fallback) reject(key, "is required");
  record(key, std::to_string(*fallback));
  return *fallback;
}

double Config::get_double(const std::string& key, std::optional<double> fallback) const {
  if (const Entry* e = find(key)) {
    const auto v = parse_real(e->value);
    if (!v) reject(key, "expects a finite number, got '" + e->value + "'");
    record(key, format_double(*v));
    return *v;
  }
  if (!fallback) reject(key, "is required");
  record(key, format_double(*fallback));
  return *fallback;
}

bool Config::get_bool(const std::string& key, std::optional<bool> fallback) const {
  if (const Entry* e = find(key)) {
    bool v;
    if (e->value == "true" || e->value == "1" || e->value == "yes") {
      v = true;
    } else if (e->value == "false" || e->value == "0" || e->value == "no") {
      v = false;
    } else {
      reject(key, "expects true or false, got '" + e->value + "'");
    }
    record(key, v ? "true" : "false");
    return v;
  }
  if (!fallback) reject(key, "is required");
  record(key, *fallback ? "true" : "false");
  return *fallback;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        std::optional<std::vector<double>> fallback) const {
  std::vector<double> out;
  if (const Entry* e = find(key)) {
    for (auto item : split_list(e->value)) {
      const auto v = parse_real(item);
      if (!v) reject(key, "expects a comma-separated list of numbers, got '" + e->value + "'");
      out.push_back(*v);
    }
  } else if (fallback) {
    out = *fallback;
  } else {
    reject(key, "is required");
  }
  std::string echo;
  for (std::size_t i = 0; i < out.size(); ++i) echo += (i ? "," : "") + format_double(out[i]);
  record(key, echo);
  return out;
}

std::vector<std::int64_t> Config::get_ints(
    const std::string& key, std::optional<std::vector<std::int64_t>> fallback) const {
  std::vector<std::int64_t> out;
  if (const Entry* e = find(key)) {
    for (auto item : split_list(e->value)) {
      const auto v = parse_integral<std::int64_t>(item);
      if (!v) reject(key, "expects a comma-separated list of integers, got '" + e->value + "'");
      out.push_back(*v);
    }
  } else if (fallback) {
    out = *fallback;
  } else {
    reject(key, "is required");
  }
  std::string echo;
  for (std::size_t i = 0; i < out.size(); ++i) echo += (i ? "," : "") + std::to_string(out[i]);
  record(key, echo);
  return out;
}

void Config::reject_unused() const {
  for (const auto& [key, entry] : entries_) {
    if (!resolved_.count(key)) {
      throw ConfigError(source_, entry.line, "unknown key '" + key + "'");
    }
  }
}

}  // namespace mhmgt::cli
