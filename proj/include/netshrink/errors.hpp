#pragma once

#include <stdexcept>

namespace netshrink {

// Violations of value contracts (bad coefficients, infeasible budgets,
// singular Gram matrices, ...). CLI maps these to exit code 1.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed external input (JSON, CSV, command lines). CLI exit code 2.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace netshrink
