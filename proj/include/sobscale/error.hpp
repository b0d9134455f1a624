#pragma once

#include <stdexcept>
#include <string>

namespace sobscale {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Empty or mismatched dimension of a lattice point / multi-index.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid numeric parameter (unsupported p, s0 >= s1, too few samples, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Operands live on different boxes or grids.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Torus grid too coarse for the lattice data it is paired with.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// A function evaluator produced a non-positive or non-finite value.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input for which the requested quantity is undefined (e.g. zero vector).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// A requested computation is not available for the given object.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Dense linear algebra failed (SVD / eigensolver did not converge).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace sobscale
