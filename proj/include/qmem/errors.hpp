#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

// A requested schedule or plan cannot be realized with physical (finite,
// bounded) control fields.  Distinguished from argument validation errors so
// callers can map it to a dedicated exit status.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// A fixed-step integration failed its step-halving stability check at the
// maximum allowed resolution.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmem
