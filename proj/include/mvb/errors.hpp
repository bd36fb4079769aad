#pragma once

#include <stdexcept>

namespace mvb {

// Bad or inconsistent input (schemas, dimensions, domains). CLI exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation that cannot proceed (singular systems, failed fits,
// non-invertible channels). CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mvb
