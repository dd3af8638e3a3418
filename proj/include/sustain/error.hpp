#pragma once

#include <stdexcept>
#include <string>

namespace sustain {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (factor rows vs tensor dims, rank mismatch, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A tensor or model violates one of its structural invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// A factor column (or its Gram diagonal) is zero where a positive
/// denominator is required.
class DegenerateColumnError : public Error {
public:
    using Error::Error;
};

/// Non-finite input, integer overflow, or an undefined quantity such as the
/// fit of an all-zero tensor.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A dense materialization or enumeration would exceed its configured cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

class UnsupportedSchemeError : public Error {
public:
    using Error::Error;
};

/// Correlation-based metric evaluated on a zero-variance column.
class MetricUndefinedError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public IoError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : IoError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace sustain
