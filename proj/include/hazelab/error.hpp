#pragma once

#include <stdexcept>
#include <string>

namespace hazelab {

// Error categories map 1:1 onto the CLI exit codes.
enum class ErrorCode {
    Usage = 1,    // bad arguments or misuse of an API
    Data = 2,     // missing/malformed files, shape or format mismatches
    Numeric = 3,  // nonfinite values or domain violations
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

}  // namespace hazelab
