#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resntk {

struct InvalidSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidIndex : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct ZeroInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TraceMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteSample : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateMean : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroRow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV parse failure; line and column are 1-based file coordinates.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line_, std::size_t column_)
      : std::runtime_error(what + " (line " + std::to_string(line_) +
                           ", column " + std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
  std::size_t line;
  std::size_t column;
};

}  // namespace resntk
