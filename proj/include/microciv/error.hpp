#pragma once

#include <stdexcept>
#include <string>

namespace microciv {

// Base error: every failure carries a machine-readable code next to the
// human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class RulesetError : public Error {
public:
    using Error::Error;
};

class IllegalAction : public Error {
public:
    using Error::Error;
};

class SaveError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace microciv
