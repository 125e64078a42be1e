#include "mcam/kv_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "mcam/errors.hpp"

namespace mcam {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    const auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(std::string_view key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + std::string(key) + "': '" + text + "' is not a number");
}

std::int64_t to_int(std::string_view key, const std::string& text) {
  std::int64_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + std::string(key) + "': '" + text + "' is not an integer");
  }
  return v;
}

}  // namespace

std::string KeyValueConfig::normalize(std::string_view key) {
  std::string out(trim(key));
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, std::string_view source) {
  KeyValueConfig cfg;
  cfg.source_ = std::string(source);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(cfg.source_ + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const auto key = normalize(view.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(cfg.source_ + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.entries_[key] = std::string(trim(view.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse(in, path.string());
}

void KeyValueConfig::set(std::string key, std::string value) {
  entries_[normalize(key)] = std::move(value);
}

bool KeyValueConfig::has(std::string_view key) const {
  return entries_.find(normalize(key)) != entries_.end();
}

std::optional<std::string> KeyValueConfig::raw(std::string_view key) const {
  const auto it = entries_.find(normalize(key));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> KeyValueConfig::get_string(std::string_view key) const {
  return raw(key);
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  return to_double(key, *v);
}

std::optional<std::int64_t> KeyValueConfig::get_int(std::string_view key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  return to_int(key, *v);
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  auto v = raw(key);
  if (!v) return std::nullopt;
  std::transform(v->begin(), v->end(), v->begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + std::string(key) + "': '" + *v + "' is not a boolean");
}

std::optional<std::vector<double>> KeyValueConfig::get_doubles(std::string_view key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) out.push_back(to_double(key, item));
  return out;
}

std::optional<std::vector<std::int64_t>> KeyValueConfig::get_ints(std::string_view key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(*v)) out.push_back(to_int(key, item));
  return out;
}

std::optional<std::vector<std::string>> KeyValueConfig::get_strings(std::string_view key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  return split_list(*v);
}

void KeyValueConfig::require_known(const std::set<std::string, std::less<>>& known) const {
  for (const auto& [key, value] : entries_) {
    if (known.find(key) == known.end()) {
      throw ConfigError(source_ + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace mcam
