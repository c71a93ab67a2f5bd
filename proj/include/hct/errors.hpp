#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hct {

/// Requested resolution exceeds the configured cell cap.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Exact (exhaustive) computation was requested on an instance that is too
/// large for it to finish.
class InstanceTooLargeError : public std::runtime_error {
public:
    explicit InstanceTooLargeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A Calderon-Zygmund decomposition was requested at a level below the root
/// average, so the root itself saturates and the two-sided average bound has
/// no parent cube to certify against.
class RootSaturatedError : public std::runtime_error {
public:
    explicit RootSaturatedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// exp(gamma*f) left the range of double at some cell.
class ExpOverflowError : public std::runtime_error {
public:
    ExpOverflowError(const std::string& msg, std::int64_t cell)
        : std::runtime_error(msg), offending_cell(cell) {}
    std::int64_t offending_cell;
};

} // namespace hct
