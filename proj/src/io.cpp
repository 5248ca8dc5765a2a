#include "csent/io.hpp"

#include <unistd.h>

#include <system_error>

#include "csent/error.hpp"
#include "csent/unicode.hpp"

namespace csent::io {

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(number, line);
  }
  if (in.bad()) throw DataError("read error on '" + path.string() + "'");
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for_each_line(path, [&](std::size_t, std::string_view line) { lines.emplace_back(line); });
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(s.substr(start));
      return fields;
    }
    fields.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string> parse_word_list(std::string_view content, const std::string& source) {
  std::vector<std::string> words;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++number;
    const std::string_view line = trim(content.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    if (!unicode::is_valid_utf8(line)) throw ParseError(source, number, "invalid UTF-8");
    words.emplace_back(line);
  }
  return words;
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::vector<std::string> words;
  for_each_line(path, [&](std::size_t number, std::string_view raw) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    if (!unicode::is_valid_utf8(line)) throw ParseError(path.string(), number, "invalid UTF-8");
    words.emplace_back(line);
  });
  return words;
}

AtomicFile::AtomicFile(std::filesystem::path target, bool binary)
    : target_(std::move(target)),
      temp_(target_.string() + ".tmp-" + std::to_string(::getpid())) {
  out_.open(temp_, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out_) throw DataError("cannot write '" + temp_.string() + "'");
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw DataError("write failed for '" + target_.string() + "'");
  out_.close();
  std::error_code ec;
  std::filesystem::rename(temp_, target_, ec);
  if (ec) throw DataError("cannot rename onto '" + target_.string() + "': " + ec.message());
  committed_ = true;
}

}  // namespace csent::io
