#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csent {

// Exit-code families used by the CLI: usage (1), data (2), numerical (3).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: unreadable files, malformed records, failed validation.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Lookup of a word that is not in the vocabulary.
class LookupError : public DataError {
 public:
  explicit LookupError(const std::string& word)
      : DataError("word not in vocabulary: '" + word + "'"), word_(word) {}

  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss, diverged training, overflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace csent
