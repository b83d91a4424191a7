#pragma once

#include <stdexcept>
#include <string>

namespace ddlab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user-facing configuration (bad eps list, domain outside box, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Gradient of the oriented distance requested at (or too close to) its
/// singular set.
class SingularPoint : public Error {
public:
    using Error::Error;
};

/// Mesh or system size exceeds the configured cap.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

class DegenerateElement : public Error {
public:
    using Error::Error;
};

/// A field evaluation produced NaN or Inf at a quadrature node.
class NonFiniteSample : public Error {
public:
    using Error::Error;
};

class EllipticityViolation : public Error {
public:
    using Error::Error;
};

class EmptySystem : public Error {
public:
    using Error::Error;
};

/// Iterative solver exhausted its budget; message carries the final residual.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// A sigmoid profile failed one of its structural axioms.
class AxiomViolation : public Error {
public:
    using Error::Error;
};

class ZeroReference : public Error {
public:
    using Error::Error;
};

class NonPositiveError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ddlab
