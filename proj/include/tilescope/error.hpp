#pragma once

#include <stdexcept>
#include <string>

namespace tilescope {

// Every failure the CLI can report maps onto one of these; exit_code() is the
// process status used by the command-line tool.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
    int exit_code() const noexcept { return code_; }

private:
    int code_;
};

// malformed or incomplete input (exit 2); pointer is a JSON pointer when known
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what, std::string pointer = {})
        : Error(pointer.empty() ? what : pointer + ": " + what, 2), pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

// well-formed input that is mathematically unusable (exit 3)
class MathError : public Error {
public:
    explicit MathError(const std::string& what) : Error(what, 3) {}
};

// precision exhaustion, budget overflow, I/O trouble (exit 4)
class RuntimeFailure : public Error {
public:
    explicit RuntimeFailure(const std::string& what) : Error(what, 4) {}
};

}  // namespace tilescope
