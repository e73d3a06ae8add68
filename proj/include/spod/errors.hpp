#pragma once

#include <stdexcept>
#include <string>

namespace spod {

// Argument outside the mathematical domain of an operation (negative
// threshold, fractional offset outside [0,1), non-finite shift, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Matrix/vector dimensions that do not fit together.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A precondition on the caller's data that is not a dimension issue,
// e.g. an unsorted singular spectrum.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Linear algebra failed (SVD on non-finite input).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spod
