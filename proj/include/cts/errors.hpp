#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cts {

// Every failure carries a stable machine-readable code next to the human
// message so callers (and the CLI's JSON error payload) never have to match
// on message text.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Invalid input or configuration, as opposed to a computation that failed on
// valid input. The CLI maps ConfigError to exit status 2, Error to 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cts
