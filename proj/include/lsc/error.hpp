#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsc {

// Base of everything the library throws. The CLI maps any of these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input at a known line (corpus, embeddings, TSV tables).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EncodingError : public Error {
 public:
  EncodingError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class OutOfVocabularyError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Pipeline-level failures such as an empty common vocabulary.
class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsc
