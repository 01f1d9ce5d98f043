#pragma once

#include <stdexcept>
#include <string>

namespace polystab {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedProgram : Error {
    explicit MalformedProgram(const std::string& what) : Error(what) {}
};

struct NumericalFailure : Error {
    explicit NumericalFailure(const std::string& what) : Error(what) {}
};

struct PolicyActionUnavailable : Error {
    int state;
    explicit PolicyActionUnavailable(int s)
        : Error("policy selects unavailable action at state " + std::to_string(s)), state(s) {}
};

struct InvalidPath : Error {
    explicit InvalidPath(const std::string& what) : Error(what) {}
};

struct LpInfeasible : Error {
    explicit LpInfeasible(const std::string& what) : Error(what) {}
};

struct GainOutOfRange : Error {
    explicit GainOutOfRange(const std::string& what) : Error(what) {}
};

struct NotIrreducible : Error {
    explicit NotIrreducible(const std::string& what) : Error(what) {}
};

struct SingularSystem : Error {
    explicit SingularSystem(const std::string& what) : Error(what) {}
};

struct EnumerationTooLarge : Error {
    explicit EnumerationTooLarge(const std::string& what) : Error(what) {}
};

struct EmptyInvariant : Error {
    explicit EmptyInvariant(const std::string& what) : Error(what) {}
};

struct InfeasibleEdge : Error {
    explicit InfeasibleEdge(const std::string& what) : Error(what) {}
};

struct InitNotOnFacet : Error {
    explicit InitNotOnFacet(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& what) : Error(what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};

}  // namespace polystab
