#pragma once

#include <stdexcept>
#include <string>

namespace unitok {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid UTF-8 in an input stream; byte_offset points at the offending byte.
class Utf8Error : public Error {
public:
  Utf8Error(const std::string& what, std::size_t byte_offset)
      : Error(what + " at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

// A word that cannot be tokenized under the active vocabulary.
class UntokenizableError : public Error {
public:
  UntokenizableError(const std::string& what, std::string word)
      : Error(what), word_(std::move(word)) {}
  const std::string& word() const noexcept { return word_; }

private:
  std::string word_;
};

// Guard refusals: enumeration limits, oracle word-length guards,
// rejection-loop caps. Carries the offending magnitude as text so callers
// can report exact big-integer counts.
class LimitError : public Error {
public:
  LimitError(const std::string& what, std::string magnitude)
      : Error(what), magnitude_(std::move(magnitude)) {}
  const std::string& magnitude() const noexcept { return magnitude_; }

private:
  std::string magnitude_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace unitok
