#pragma once

#include <stdexcept>

namespace veason {

// Input violates a documented precondition or a file schema.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A file could not be read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation produced a non-finite value where the contract forbids it.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace veason
