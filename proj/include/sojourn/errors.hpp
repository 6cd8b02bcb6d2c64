#pragma once

#include <stdexcept>
#include <string>

namespace sojourn {

// Raised when a chain/partition pair violates the boundary assumptions
// required by the generating-function solvers.
class assumption_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Roots too close to the unit circle, near-multiple roots, non-convergence,
// singular numeric systems.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed chain descriptions and other bad user input.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sojourn
