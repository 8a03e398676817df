#pragma once

#include <stdexcept>
#include <string>

namespace hill4bp {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trajectory entered the collision floor around the tertiary.
struct CollisionError : std::runtime_error {
    double r;
    double t;
    CollisionError(double r_, double t_)
        : std::runtime_error("collision floor reached: r=" + std::to_string(r_) +
                             " at t=" + std::to_string(t_)),
          r(r_), t(t_) {}
};

struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoCrossingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CorrectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeedingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FootpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContinuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A pipeline stage was invoked before the stage that produces its input.
struct StagedDependencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hill4bp
