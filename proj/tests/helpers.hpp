#pragma once

#include <functional>
#include <string>

#include "cts/errors.hpp"

// Runs fn and returns the error code it threw, or "" when it did not throw.
// Lets tests assert on stable codes instead of message text.
inline std::string thrown_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const cts::Error& e) {
        return e.code();
    }
    return "";
}

inline bool throws_config_error(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const cts::ConfigError&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}
