#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

/// Rates, durations or other inputs outside their admissible domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A matrix handed to an analysis routine violates a structural property
/// (unit determinant, symplecticity).
class InconsistentMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A quantum state violating its own invariants (uncertainty relation,
/// symmetry, normalization).
class InvalidState : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fock cutoff unable to host the requested state.
class InvalidCutoff : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace zeno
