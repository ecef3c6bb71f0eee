#pragma once

#include <stdexcept>
#include <string>

namespace mps {

/// Thrown when a protocol run must stop with no output for anyone
/// (missing message, failed share-consistency check, crashed quorum
/// member, exhausted retry budget).
struct protocol_abort : std::runtime_error {
    explicit protocol_abort(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an exhaustive enumeration would exceed its configured
/// bit budget.
struct budget_exceeded : std::runtime_error {
    explicit budget_exceeded(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mps
