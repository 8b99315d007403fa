#pragma once

#include <stdexcept>
#include <string>

namespace mgtd {

enum class ErrorKind {
    load,          // unreadable or malformed input file
    validation,    // data violates a documented invariant
    config,        // bad configuration key/value or shape mismatch
    input,         // bad argument to an operation
    integrity,     // checksum or container corruption
    metric,        // metric undefined for the given set
    size,          // enumeration budget exceeded
    construction,  // corpus construction impossible (e.g. no donor sentences)
    training,      // training cannot proceed
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace mgtd
