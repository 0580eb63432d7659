#pragma once

#include <stdexcept>
#include <string>

namespace sparsegal {

// Internal consistency conditions that must hold regardless of build type.
// Violations indicate broken invariants, not bad user input.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InternalError(msg);
}

// Problems with caller-supplied data (bad documents, unsupported dimensions).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require_input(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

// Numerical procedures that failed to converge or to certify a result.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sparsegal
