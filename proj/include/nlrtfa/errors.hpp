#pragma once

#include <stdexcept>
#include <string>

namespace nlrtfa {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct OutOfBounds : Error {
    using Error::Error;
};

struct ImageTooSmall : Error {
    using Error::Error;
};

struct InvalidRatio : Error {
    using Error::Error;
};

struct WrongOperatorVariant : Error {
    using Error::Error;
};

struct CacheMismatch : Error {
    using Error::Error;
};

// Jenrich eigensystem unusable for this draw of u, v (complex spectrum,
// repeated eigenvalues, or failed reciprocal pairing). Retried internally;
// surfaces only after all retries fail.
struct DegenerateEigensystem : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace nlrtfa
