#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lingobf {

// Base for all data errors raised by the library. The CLI maps these to exit
// code 1 and prints `kind` plus `what()` as a JSON diagnostic.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error("parse_error", message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::vector<std::string> details = {})
      : Error("validation_error", message), details_(std::move(details)) {}

  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

class MapMismatchError : public Error {
 public:
  explicit MapMismatchError(const std::string& message) : Error("map_mismatch", message) {}
};

class CoverageError : public Error {
 public:
  CoverageError(const std::string& message, std::vector<std::string> uncovered)
      : Error("coverage_error", message), uncovered_(std::move(uncovered)) {}

  const std::vector<std::string>& uncovered() const noexcept { return uncovered_; }

 private:
  std::vector<std::string> uncovered_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace lingobf
