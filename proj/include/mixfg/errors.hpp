#pragma once

#include <stdexcept>
#include <string>

namespace mixfg {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Vector/matrix length mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Every hypothesis has zero mass: nothing left to normalize.
class DegenerateEvidenceError : public Error {
public:
    using Error::Error;
};

// Graph construction or validation failure (arity, ports, cycles, ...).
class GraphError : public Error {
public:
    using Error::Error;
};

// Message family combination the engine has no closed form for.
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

// Internal consistency violation (unnormalized probabilities, NaN, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

// File read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mixfg
