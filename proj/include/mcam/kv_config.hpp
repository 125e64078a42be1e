#pragma once

// Minimal `key = value` configuration files.
//
//   # comment
//   alpha = 0.1
//   gain  = 1.0, 0.85, 0.5, 0.2
//
// Keys are case-sensitive; '-' and '_' are interchangeable so a file can use
// the same spelling as the CLI flags. Later definitions of a key override
// earlier ones. All parse failures throw ConfigError.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mcam {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& in, std::string_view source = "<stream>");
  static KeyValueConfig from_file(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  [[nodiscard]] bool has(std::string_view key) const;
  [[nodiscard]] std::optional<std::string> raw(std::string_view key) const;

  [[nodiscard]] std::optional<std::string> get_string(std::string_view key) const;
  [[nodiscard]] std::optional<double> get_double(std::string_view key) const;
  [[nodiscard]] std::optional<std::int64_t> get_int(std::string_view key) const;
  [[nodiscard]] std::optional<bool> get_bool(std::string_view key) const;
  [[nodiscard]] std::optional<std::vector<double>> get_doubles(std::string_view key) const;
  [[nodiscard]] std::optional<std::vector<std::int64_t>> get_ints(std::string_view key) const;
  [[nodiscard]] std::optional<std::vector<std::string>> get_strings(std::string_view key) const;

  // Throws ConfigError naming the first key not in `known`.
  void require_known(const std::set<std::string, std::less<>>& known) const;

  [[nodiscard]] const std::map<std::string, std::string, std::less<>>& entries() const noexcept {
    return entries_;
  }

 private:
  static std::string normalize(std::string_view key);
  std::map<std::string, std::string, std::less<>> entries_;
  std::string source_ = "<config>";
};

}  // namespace mcam
