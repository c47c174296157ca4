#include "keyvalue.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "stpp/errors.hpp"
#include "stpp/patterns.hpp"

namespace stpp::app {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& origin) {
  KeyValueFile file;
  file.origin_ = origin;
  std::ostringstream all;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    all << line << '\n';
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, number));
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, number));
    if (file.entries_.contains(key)) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, number, key));
    }
    file.entries_[key] = {trim(body.substr(eq + 1)), number};
  }
  file.text_ = all.str();
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  return parse(in, path.string());
}

void KeyValueFile::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(fmt::format("{}: {}: {}", origin_, key, message));
  throw ConfigError(fmt::format("{}:{}: {}: {}", origin_, it->second.line, key, message));
}

std::optional<std::string> KeyValueFile::text(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::string KeyValueFile::text_or(const std::string& key, const std::string& fallback) const {
  return text(key).value_or(fallback);
}

std::string KeyValueFile::required(const std::string& key) const {
  auto v = text(key);
  if (!v || v->empty()) fail(key, "required key is missing");
  return *v;
}

std::optional<double> KeyValueFile::number(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  const auto parsed = parse_number(*v);
  if (!parsed || !std::isfinite(*parsed)) fail(key, fmt::format("'{}' is not a number", *v));
  return parsed;
}

double KeyValueFile::number_or(const std::string& key, double fallback) const {
  return number(key).value_or(fallback);
}

std::optional<std::uint64_t> KeyValueFile::count(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    fail(key, fmt::format("'{}' is not a non-negative integer", *v));
  }
  return out;
}

std::uint64_t KeyValueFile::count_or(const std::string& key, std::uint64_t fallback) const {
  return count(key).value_or(fallback);
}

std::optional<std::vector<double>> KeyValueFile::numbers(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  try {
    return parse_number_list(*v);
  } catch (const ConfigError& e) {
    fail(key, e.what());
  }
}

void KeyValueFile::reject_unknown(const std::set<std::string>& allowed) const {
  std::string unknown;
  for (const auto& [key, entry] : entries_) {
    if (allowed.contains(key)) continue;
    unknown += fmt::format("{}'{}' (line {})", unknown.empty() ? "" : ", ", key, entry.line);
  }
  if (!unknown.empty()) throw ConfigError(fmt::format("{}: unknown key(s) {}", origin_, unknown));
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const auto v = parse_number(token);
    if (!v || !std::isfinite(*v)) throw ConfigError(fmt::format("'{}' is not a number", token));
    out.push_back(*v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return out;
}

}  // namespace stpp::app
