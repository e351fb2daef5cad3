#pragma once

#include <stdexcept>
#include <string>

namespace difnet {

/// Invalid configuration or parameter values (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent file contents (CLI exit code 1).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace difnet
