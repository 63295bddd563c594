#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace topomet {

// Base class for all numeric-domain failures raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GaplessPointError : public Error {
public:
    using Error::Error;
};

class StepTooLargeError : public Error {
public:
    using Error::Error;
};

class CriticalMassError : public Error {
public:
    using Error::Error;
};

class NonQuantizedError : public Error {
public:
    using Error::Error;
};

class WeightSumViolation : public Error {
public:
    using Error::Error;
};

class CompletenessViolation : public Error {
public:
    using Error::Error;
};

class NegativeWeightError : public Error {
public:
    using Error::Error;
};

class DilationFailure : public Error {
public:
    using Error::Error;
};

class SingularOutcomeError : public Error {
public:
    using Error::Error;
};

class DegenerateQfiError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    using Error::Error;
};

class PoleSingularityError : public Error {
public:
    using Error::Error;
};

class SingularFimError : public Error {
public:
    using Error::Error;
};

// Carries the half-space certificate: a unit vector u with u.m_i > 0 for
// every requested Bloch direction, which rules out any completeness solution.
class InfeasibleDirectionsError : public Error {
public:
    InfeasibleDirectionsError(const std::string& what, const Eigen::Vector3d& separating)
        : Error(what), separating_direction(separating) {}

    Eigen::Vector3d separating_direction;
};

class AllRestartsInfeasibleError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace topomet
