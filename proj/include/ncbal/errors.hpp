#pragma once

#include <stdexcept>
#include <string>

namespace ncbal {

/// A state left the admissible set, or an operation was asked to act outside it.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid run configuration or command-line input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Structural problem in an otherwise parseable mesh.
class MeshValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The time loop produced a state it cannot continue from.
class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& message, long step, int cell)
        : std::runtime_error("step " + std::to_string(step) + ", cell " + std::to_string(cell) + ": " +
                             message),
          step_(step), cell_(cell) {}

    long step() const noexcept { return step_; }
    int cell() const noexcept { return cell_; }

private:
    long step_;
    int cell_;
};

}  // namespace ncbal
