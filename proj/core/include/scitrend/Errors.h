#pragma once

#include <stdexcept>
#include <string>

namespace scitrend {

// Root of the library's exception hierarchy. Every failure raised by this
// library derives from Error, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Malformed external input: corpus files, saved embedding spaces, CSV samples.
class ParseError : public Error {
public:
    using Error::Error;
};

// Invalid configuration values or combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A precondition of a numeric or combinatorial operation was violated
// (unknown entity, empty slice, zero denominator, too few samples, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A pipeline stage failed; carries the stage name for diagnostics.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& message)
        : Error("[" + stage + "] " + message), stage_(stage) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace scitrend
