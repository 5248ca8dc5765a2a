#include "csent/config.hpp"

#include <charconv>

#include "csent/error.hpp"
#include "csent/io.hpp"

namespace csent {

void KeyValueConfig::declare(const std::string& key, std::string default_value) {
  defaults_[key] = std::move(default_value);
}

void KeyValueConfig::load_file(const std::filesystem::path& path) {
  std::string content;
  for (const auto& line : io::read_lines(path)) content += line + "\n";
  load_string(content, path.string());
}

void KeyValueConfig::load_string(std::string_view content, const std::string& source) {
  std::size_t number = 0;
  for (std::string_view raw : io::split(content, '\n')) {
    ++number;
    const std::string_view line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, number, "expected 'key = value'");
    const std::string key(io::trim(line.substr(0, eq)));
    const std::string value(io::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(source, number, "empty key");
    if (!declared(key)) throw ParseError(source, number, "unknown key '" + key + "'");
    file_values_[key] = Value{value, source};
  }
}

void KeyValueConfig::set_override(const std::string& key, std::string value) {
  if (!declared(key)) throw UsageError("unknown setting '" + key + "'");
  overrides_[key] = Value{std::move(value), "command line"};
}

KeyValueConfig::Value KeyValueConfig::resolve(const std::string& key) const {
  if (auto it = overrides_.find(key); it != overrides_.end()) return it->second;
  if (auto it = file_values_.find(key); it != file_values_.end()) return it->second;
  auto it = defaults_.find(key);
  if (it == defaults_.end()) throw Error("setting '" + key + "' was never declared");
  return Value{it->second, "default"};
}

std::string KeyValueConfig::get(const std::string& key) const { return resolve(key).text; }

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw DataError("setting '" + key + "': cannot parse '" + text + "' as a number");
  return value;
}

}  // namespace

std::int64_t KeyValueConfig::get_int(const std::string& key) const {
  return parse_number<std::int64_t>(key, get(key));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_number<double>(key, get(key));
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string text = get(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw DataError("setting '" + key + "': expected true/false, got '" + text + "'");
}

void KeyValueConfig::echo(std::ostream& out, std::string_view prefix) const {
  for (const auto& [key, _] : defaults_) {
    const Value v = resolve(key);
    out << prefix << key << " = " << v.text << "  (" << v.source << ")\n";
  }
}

}  // namespace csent
