#pragma once

#include <stdexcept>
#include <string>

namespace nqkr {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    success = 0,
    config = 2,
    overflow = 3,
    eigensolver = 4,
    fit = 5,
};

// Base of every library error. Each subclass carries the exit code the CLI
// maps it to, so callers never need a type switch.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, ExitCode code)
        : std::runtime_error(what), code_(code) {}

    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Invalid parameters, bad flags, mismatched dimensions.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, ExitCode::config) {}
};

// Amplitudes left the double range even with norm rescaling.
class OverflowError : public Error {
public:
    explicit OverflowError(const std::string& what) : Error(what, ExitCode::overflow) {}
};

class EigensolverError : public Error {
public:
    explicit EigensolverError(const std::string& what) : Error(what, ExitCode::eigensolver) {}
};

// A least-squares fit had no usable window or the wrong sign.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what, ExitCode::fit) {}
};

}  // namespace nqkr
