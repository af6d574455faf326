#ifndef SCQA_ERRORS_HPP
#define SCQA_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace scqa {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Compact scientific formatting for error messages; std::to_string flattens
// small residuals to 0.000000.
inline std::string num_str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct DimensionMismatch : Error {
    using Error::Error;
};

// Lambda fails the symplectic identity beyond tolerance.
struct SymplecticDrift : Error {
    using Error::Error;
};

struct SingularCovariance : Error {
    using Error::Error;
};

struct NonRealHamiltonian : Error {
    using Error::Error;
};

// A monitored conserved quantity drifted beyond tolerance during integration.
struct ConservationDrift : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

struct NotStationary : Error {
    using Error::Error;
};

struct TruncationError : Error {
    using Error::Error;
};

struct NonHermitian : Error {
    using Error::Error;
};

struct UnsupportedDim : Error {
    using Error::Error;
};

struct UnsupportedCovariance : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// A polynomial product exceeded the configured degree cap.
struct DegreeCapExceeded : Error {
    using Error::Error;
};

} // namespace scqa

#endif
