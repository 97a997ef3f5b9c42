#pragma once

#include <stdexcept>
#include <string>

namespace gmb {

// A mathematical precondition of an estimator does not hold for the given
// inputs (zero prior mass where mass is required, conditioning on an event
// of probability zero, and the like).
class precondition_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical routine failed to deliver its advertised accuracy:
// quadrature non-convergence, underflow of a normalizer, non-finite values.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal state that should be unreachable if the library is correct,
// e.g. a stored stopping time that contradicts the zero set of its path.
class integrity_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace gmb
