#pragma once

#include <stdexcept>
#include <string>

namespace resil {

/// A caller-supplied argument violates an operation's precondition.
/// The CLI maps this to exit code 1.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An enumeration would exceed its configured work budget.
/// The CLI maps this to exit code 2.
class budget_exceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw precondition_error(message);
}

} // namespace detail
} // namespace resil
