#pragma once

#include <stdexcept>
#include <string>

namespace aggre {

/// Invalid input: parameters, configuration, malformed data.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file; the message carries the offending line number.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The numerics broke down (negative conformer pool, non-finite model values, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configured work budget (time steps, iterations) was exceeded.
class ResourceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace aggre
