#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace csent::io {

/// Reads a text file into lines (without terminators; a trailing '\r' is
/// dropped). Throws DataError if the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Line-at-a-time reader; the callback receives (1-based line number, line).
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn);

/// Splits on a single character, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

/// Plain word-list file: one entry per line, '#' comment lines and blank
/// lines ignored, surrounding whitespace trimmed. Every entry is checked for
/// valid UTF-8 (ParseError with the line number otherwise).
std::vector<std::string> read_word_list(const std::filesystem::path& path);
std::vector<std::string> parse_word_list(std::string_view content, const std::string& source);

/// Writes to "<target>.tmp-<pid>" and renames onto the target on commit().
/// If the writer is destroyed without commit() the temporary is removed, so
/// a failed stage never leaves a partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target, bool binary = false);
  ~AtomicFile();

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace csent::io
