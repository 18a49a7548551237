#pragma once

#include <stdexcept>
#include <string>

namespace tvwb {

enum class ErrorKind {
    invalid_input,  // semantic rejection (bad value, failed precondition)
    mismatch,       // incompatible operands (heights, vectors, metrics)
    too_large,      // a configured work cap was exceeded
    parse,          // malformed input document
    io,             // file system failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

} // namespace tvwb
