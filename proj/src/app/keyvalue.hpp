#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stpp::app {

// `key = value` lines; '#' starts a comment; blank lines ignored. Keys are
// unique. Every lookup marks a key as used so unknown keys can be reported.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& origin);
  static KeyValueFile load(const std::filesystem::path& path);

  const std::string& origin() const { return origin_; }
  const std::string& text() const { return text_; }
  bool has(const std::string& key) const { return entries_.contains(key); }

  std::optional<std::string> text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  std::string required(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::optional<std::uint64_t> count(const std::string& key) const;
  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) const;
  std::optional<std::vector<double>> numbers(const std::string& key) const;

  // Throws ConfigError naming every key not in `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const;

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  std::string origin_;
  std::string text_;
  std::map<std::string, Entry> entries_;
};

// Whitespace or comma separated doubles.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace stpp::app
