#pragma once

#include <stdexcept>
#include <string>

namespace flas {

// Base class for everything thrown by this library. The CLI maps subtypes
// onto exit codes; everything else can just catch Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

// --- simulator ---
struct ScalingInProgress : Error {
    ScalingInProgress() : Error("a scaling action is already in progress") {}
};
struct AtMinimum : Error {
    AtMinimum() : Error("cannot scale in below one matcher instance") {}
};
struct Unsatisfiable : Error {
    using Error::Error;
};

// --- metrics preprocessing ---
struct EmptyWindow : Error {
    EmptyWindow() : Error("preprocess requires a non-empty sample window") {}
};

// --- forecasting ---
struct TooShort : Error {
    using Error::Error;
};
struct BadWindow : Error {
    using Error::Error;
};
struct RankDeficient : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct NonStationary : Error {
    using Error::Error;
};
struct InsufficientHistory : Error {
    using Error::Error;
};
struct TooFewRows : Error {
    using Error::Error;
};

// --- workload generation ---
struct InvalidSpec : Error {
    using Error::Error;
};

// --- evaluation ---
struct NoScalingEventsRecorded : Error {
    NoScalingEventsRecorded() : Error("profiling run triggered no scaling events") {}
};
struct EmptyTrace : Error {
    EmptyTrace() : Error("trace has no rows") {}
};
struct MismatchedRuns : Error {
    using Error::Error;
};

} // namespace flas
