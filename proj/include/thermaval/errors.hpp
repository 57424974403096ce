#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thermaval {

/// Base for all toolkit errors. CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Degenerate or self-intersecting geometry.
class InvalidGeometryError : public Error {
public:
    using Error::Error;
};

/// Geometry outside the supported configurations (e.g. non-perpendicular planes).
class UnsupportedConfigurationError : public Error {
public:
    using Error::Error;
};

/// Inconsistent building model (dangling references, disconnected zones, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Bad parameter value for a numerical routine (filter design, STFT grids, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration input (unknown factor target, mismatched dimensions, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be parsed; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Frequency assignment cannot fit the requested factor count; reports the
/// smallest run count that would.
class CapacityError : public Error {
public:
    CapacityError(const std::string& msg, std::size_t minimal_runs)
        : Error(msg), minimal_runs_(minimal_runs) {}
    std::size_t minimal_runs() const { return minimal_runs_; }

private:
    std::size_t minimal_runs_;
};

}  // namespace thermaval
