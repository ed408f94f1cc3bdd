#pragma once

#include <stdexcept>
#include <string>

namespace tablerl {

// Base for all library errors so callers can catch the whole family at once.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed table source (ragged rows, bad header declarations, ...).
// `line` is the zero-based physical line of the offending input.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& reason)
      : Error("format error at line " + std::to_string(line) + ": " + reason),
        line(line),
        reason(reason) {}
  std::size_t line;
  std::string reason;
};

class IndexOutOfRangeError : public Error {
 public:
  IndexOutOfRangeError(const std::string& op, std::size_t index)
      : Error("index " + std::to_string(index) + " out of range in " + op),
        op(op),
        index(index) {}
  std::string op;
  std::size_t index;
};

class TableTooSmallError : public Error {
 public:
  explicit TableTooSmallError(const std::string& what) : Error(what) {}
};

class GroupTooSmallError : public Error {
 public:
  explicit GroupTooSmallError(std::size_t size)
      : Error("group size " + std::to_string(size) + " is below the minimum of 2") {}
};

class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& what) : Error(what) {}
};

class BudgetExceededError : public Error {
 public:
  explicit BudgetExceededError(const std::string& what) : Error(what) {}
};

class ClientError : public Error {
 public:
  explicit ClientError(const std::string& what) : Error(what) {}
};

class GroupUnusableError : public Error {
 public:
  explicit GroupUnusableError(const std::string& what) : Error(what) {}
};

class NotProgramFormError : public Error {
 public:
  NotProgramFormError() : Error("sample is not a program-form completion") {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

}  // namespace tablerl
