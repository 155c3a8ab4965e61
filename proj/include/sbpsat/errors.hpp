#pragma once

#include <stdexcept>
#include <string>

namespace sbpsat {

enum class ErrorKind { invariant, config, blowup };

// Base class of all library errors; the kind maps onto the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(ErrorKind::invariant, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class BlowUpError : public Error {
public:
    explicit BlowUpError(const std::string& what) : Error(ErrorKind::blowup, what) {}
};

// Raised by the interpolation forge: budget violations, infeasible ansatz, rank deficiency.
class ForgeError : public Error {
public:
    explicit ForgeError(const std::string& what) : Error(ErrorKind::invariant, what) {}
};

int exit_code(ErrorKind kind) noexcept;

}  // namespace sbpsat
