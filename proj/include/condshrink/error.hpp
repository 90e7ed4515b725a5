#pragma once

#include <stdexcept>
#include <string>

namespace condshrink {

// Numeric values are part of the C ABI (see condshrink.h); append only.
enum class ErrorCode : int {
    ok = 0,
    domain = 1,
    divergent_integral = 2,
    singular_observation = 3,
    nonstationary = 4,
    dimension_too_small = 5,
    not_psd = 6,
    config = 7,
    io = 8,
    run_failed = 9,
    invalid_argument = 10,
    internal = 99,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace condshrink
