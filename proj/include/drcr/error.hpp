#pragma once

#include <stdexcept>
#include <string>

namespace drcr {

/// Bad input: dimension mismatch, violated precondition, malformed LP.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A solver did not reach an optimal / converged state.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failures (unreadable input, unwritable output directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CSV / JSON content errors. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {
[[noreturn]] inline void invalid(const std::string& msg) { throw InvalidArgument(msg); }
inline void require(bool cond, const char* msg) {
    if (!cond) throw InvalidArgument(msg);
}
}  // namespace detail

}  // namespace drcr
