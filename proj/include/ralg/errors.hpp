#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ralg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is a 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(message + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Evaluation left the real domain of a function (log/sqrt of a non-positive value, ...).
class DomainError : public Error {
public:
    DomainError(const std::string& message, std::string subexpression)
        : Error(message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

class SingularMetric : public Error {
public:
    using Error::Error;
};

/// An input violates an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Chart file syntax or content error; `line` is 1-based.
class ChartFileError : public Error {
public:
    ChartFileError(const std::string& message, int line)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace ralg
