#pragma once

#include <stdexcept>
#include <string>

namespace topogen {

// Error taxonomy shared by all modules. Everything derives from Error so
// callers can catch broadly; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or size conflict in a numeric op.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Graph-structure violation: a cycle, an out-of-range edge, a tape Var used
// with a tape it does not belong to, or backward on a non-scalar loss.
class GraphError : public Error {
public:
    using Error::Error;
};

// Named entity (parameter, role, embedding key) not found.
class LookupError : public Error {
public:
    using Error::Error;
};

// Duplicate name where uniqueness is required.
class ConflictError : public Error {
public:
    using Error::Error;
};

// Malformed caller-supplied value (empty query text, bad blueprint field).
class InputError : public Error {
public:
    using Error::Error;
};

// Structural validation failure (cycle, non-topological order, bad file schema).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A fixed-width encoding cannot hold the requested index.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Inconsistent or unusable run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Generation terminated with END on the first step; the graph would be empty.
class EmptyTopologyError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradient during training.
class NumericError : public Error {
public:
    using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Remote backend failed after exhausting retries.
class BackendError : public Error {
public:
    using Error::Error;
};

}  // namespace topogen
