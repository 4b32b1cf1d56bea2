#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memetrace {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised by the JSONL readers; carries the 1-based line number of the offending record.
class LineError : public Error {
public:
    LineError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

/// A pipeline stage was started before the stage producing its input ran.
class MissingArtifact : public Error {
public:
    MissingArtifact(const std::string& artifact, const std::string& producer);
    const std::string& artifact() const noexcept { return artifact_; }

private:
    std::string artifact_;
};

class UnsupportedCommunity : public Error {
public:
    using Error::Error;
};

} // namespace memetrace
