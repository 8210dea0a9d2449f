#pragma once

#include <stdexcept>
#include <string>

namespace mgcheck {

// Base class for all errors raised by the framework.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A composition or plan problem: conflicting declarations, dangling
// variable references, unknown variants.
struct SemanticError : Error {
    explicit SemanticError(const std::string& what) : Error(what) {}
};

// A state does not conform to the variable table it is used with.
struct MalformedStateError : Error {
    explicit MalformedStateError(const std::string& what) : Error(what) {}
};

// apply() was called with a disabled guard; a caller bug.
struct GuardNotEnabledError : Error {
    explicit GuardNotEnabledError(const std::string& what) : Error(what) {}
};

// A guard touched a variable outside its declared reads, or an update
// touched a variable outside its declared writes. Raised eagerly so
// stale action metadata cannot poison the interaction analysis.
struct MetadataViolationError : Error {
    explicit MetadataViolationError(const std::string& what) : Error(what) {}
};

// Dependency/interaction classification was not supplied where required.
struct ClassificationMissingError : Error {
    explicit ClassificationMissingError(const std::string& what) : Error(what) {}
};

// Conformance: the composed spec contains an action the mapping lacks.
struct UnmappedActionError : Error {
    explicit UnmappedActionError(const std::string& what) : Error(what) {}
};

// Simulation: an event was applied that the cluster cannot accept
// (crash of a dead node, message on an empty channel, ...).
struct InapplicableEventError : Error {
    explicit InapplicableEventError(const std::string& what) : Error(what) {}
};

}  // namespace mgcheck
