#pragma once

#include <stdexcept>
#include <string>

namespace lpm {

// Thrown when a cumulant or moment generating function is requested outside
// the finiteness domain of the displacement law.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an operation is asked for in a regime where it is undefined
// (e.g. the critical constant away from the critical tilt).
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a snapshot window does not cover the support of a test function.
struct WindowError : std::runtime_error {
    explicit WindowError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the retained frontier of a pruned simulation cannot fit in the
// configured particle budget.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed or inconsistent run configuration files.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lpm
