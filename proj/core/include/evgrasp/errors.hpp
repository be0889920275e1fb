#pragma once

#include <stdexcept>
#include <string>

namespace evgrasp {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (bad record, bad header, bad JSON).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
        : Error(format(what, line, offset)), line_(line), offset_(offset) {}

    std::size_t line() const { return line_; }
    std::size_t offset() const { return offset_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t offset) {
        std::string msg = what;
        if (line > 0) msg += " (line " + std::to_string(line) + ")";
        if (offset > 0) msg += " (offset " + std::to_string(offset) + ")";
        return msg;
    }
    std::size_t line_;
    std::size_t offset_;
};

/// Well-formed input violating a domain constraint (coordinate bounds, degenerate shapes).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Timestamp regression beyond the tolerated jitter.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (zero step, non-positive threshold).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Period alignment cannot be satisfied for a recording step.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Model estimation failed (too few inliers, rank-deficient system).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Dataset split cannot be constructed as requested.
class SplitError : public Error {
public:
    using Error::Error;
};

/// File could not be opened or written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace evgrasp
