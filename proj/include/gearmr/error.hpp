#pragma once

#include <stdexcept>
#include <string>

namespace gearmr {

enum class ErrorKind {
    InvalidArgument,
    Parse,
    NonuniformSampling,
    InsufficientSamples,
    DegenerateSnapshot,
    StiffFailure,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers map failures
/// onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace gearmr
