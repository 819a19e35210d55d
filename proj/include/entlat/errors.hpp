#pragma once

#include <stdexcept>
#include <string>

namespace entlat {

// Invalid user-supplied parameters or run configuration. The CLI maps this
// to exit code 2; everything else that escapes maps to exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A basis change would silently drop amplitude weight.
struct data_loss_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operands with incompatible bases or dimensions, or a dimension outside
// the range an algorithm supports.
struct dimension_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric input violates a contract beyond tolerance (e.g. a density matrix
// with an eigenvalue below -1e-10).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace entlat
