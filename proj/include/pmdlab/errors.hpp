#pragma once

#include <stdexcept>
#include <string>

namespace pmdlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed parameters, mismatched dimensions, bad flags.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// An exact oracle would need more lattice points than the configured cap.
class SupportCapExceeded : public Error {
public:
    using Error::Error;
};

// A theory constant or cover size exceeds what can be executed.
class CapExceeded : public Error {
public:
    using Error::Error;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

}  // namespace pmdlab
