#pragma once

#include <stdexcept>
#include <string>

namespace paraqa {

// Exit-code contract used by the CLI: InputError -> 2, StateError -> 3,
// failed checks -> 1, anything else -> 1.

/// Bad user input: unreadable files, malformed JSON, invalid configuration.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Artifacts that do not fit together (checkpoint vs. windows vs. config).
class StateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Document exceeds the markup capacity (paragraph count > p_max).
class CapacityError : public InputError {
  public:
    explicit CapacityError(const std::string& what) : InputError("CAPACITY: " + what) {}
};

/// A gradient turned NaN/inf before an optimizer step.
class NonfiniteGradientError : public std::runtime_error {
  public:
    explicit NonfiniteGradientError(const std::string& what)
        : std::runtime_error("NONFINITE_GRAD: " + what) {}
};

}  // namespace paraqa
