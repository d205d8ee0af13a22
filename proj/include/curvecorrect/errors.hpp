#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curvecorrect {

/// Malformed input file or CSV body. Carries a 1-based line and column.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Too few records (or too few distinct sample sizes) to run the estimator.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data that cannot support the requested operation (e.g. a single-class
/// training set). Callers typically resample and retry.
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace curvecorrect
