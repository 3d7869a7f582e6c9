#pragma once

#include <stdexcept>
#include <string>

namespace gigdeploy {

// Invalid argument outside the model's domain (negative cost, zero lead time, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Offered load meets or exceeds capacity; no finite stationary lead time exists.
struct UnstableQueue : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A staffing decomposition was requested for a channel that serves nobody.
struct DegenerateSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computed regime map violates the contiguous-band structure it must have.
// Signals a solver defect, not admissible model behavior.
struct PatternViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A comparative-statics guarantee failed at a point where it must hold.
struct TheoremViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative routine exhausted its budget without meeting its tolerance.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gigdeploy
