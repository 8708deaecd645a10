#pragma once

#include <stdexcept>
#include <string>

namespace walsh {

// Invalid construction parameters (measures, profiles, configs).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Arguments outside the domain of a closed-form evaluator.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A grid function whose origin representation conflicts with the form kind,
// or arrays of mismatched length.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Barrier breakpoints that do not fall on grid nodes.
class AlignmentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Linear solver or eigensolver failure. Never swallowed.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace walsh
