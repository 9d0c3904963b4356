#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fincascade {

/// Base for failures while reading economy files.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public LoadError {
public:
    using LoadError::LoadError;
};

/// Malformed row. Carries the file and 1-based line number.
class ParseError : public LoadError {
public:
    ParseError(std::string file, std::size_t line, const std::string& message)
        : LoadError(file + ":" + std::to_string(line) + ": " + message), file_(std::move(file)), line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// An edge or loan names an id that is not defined.
class ReferentialError : public LoadError {
public:
    ReferentialError(const std::string& message, std::string id) : LoadError(message), id_(std::move(id)) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

/// Data parsed but violates a model invariant (e.g. non-positive bank equity).
class InvariantError : public LoadError {
public:
    InvariantError(const std::string& message, std::string entity) : LoadError(message), entity_(std::move(entity)) {}
    const std::string& entity() const { return entity_; }

private:
    std::string entity_;
};

class DegenerateDenominator : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke an operation's precondition.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InfeasibleParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace fincascade
