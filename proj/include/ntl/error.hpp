#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ntl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV rows, rule DSL, JSON documents). Line and column
/// are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out;
    if (line > 0) {
      out = "line " + std::to_string(line);
      if (column > 0) out += ", column " + std::to_string(column);
      out += ": ";
    }
    return out + what;
  }

  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = std::to_string(v.size()) + " invariant violation(s)";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }

  std::vector<std::string> violations_;
};

class MissingAttributeError : public Error {
 public:
  explicit MissingAttributeError(std::string name)
      : Error("missing attribute '" + name + "'"), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a training procedure is handed data with a single class (or
/// too few examples of one class) for the requested operation.
class ClassStarvedError : public Error {
 public:
  using Error::Error;
};

}  // namespace ntl
