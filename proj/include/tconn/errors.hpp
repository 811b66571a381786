#pragma once

#include <stdexcept>
#include <string>

namespace tconn {

// Base class for everything the library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A stated precondition of an operation does not hold.
struct Precondition : Error {
    using Error::Error;
};

struct NotAProjector : Error {
    using Error::Error;
};
struct NotAnInvolution : Error {
    using Error::Error;
};
struct GridMismatch : Error {
    using Error::Error;
};
struct NotAConnection : Error {
    using Error::Error;
};
struct NotMode0 : Error {
    using Error::Error;
};
struct NotUnitary : Error {
    using Error::Error;
};
struct NotNormalized : Error {
    using Error::Error;
};
struct SeedNotHolomorphic : Error {
    using Error::Error;
};
struct PipelineResidual : Error {
    using Error::Error;
};
struct VanishingSection : Error {
    using Error::Error;
};
struct RankDefect : Error {
    using Error::Error;
};
struct DegreeNotLowered : Error {
    using Error::Error;
};
struct NoLineFound : Error {
    using Error::Error;
};
struct NearPole : Error {
    using Error::Error;
};
struct DegenerateChart : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

} // namespace tconn
