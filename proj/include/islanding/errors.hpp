#pragma once

#include <stdexcept>
#include <string>

namespace islanding {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- case ingestion / data model ----
class MalformedCase : public Error {
public:
    using Error::Error;
};
class InconsistentTopology : public Error {
public:
    using Error::Error;
};
class ZeroReactance : public Error {
public:
    using Error::Error;
};

// ---- power flow ----
class SingularSystem : public Error {
public:
    using Error::Error;
};
class ImbalancedCase : public Error {
public:
    using Error::Error;
};

// ---- lookups ----
class UnknownSubstation : public Error {
public:
    using Error::Error;
};
class UnknownLine : public Error {
public:
    using Error::Error;
};

// ---- MILP engine ----
class DuplicateVariableName : public Error {
public:
    using Error::Error;
};
class UnknownVariableInTerm : public Error {
public:
    using Error::Error;
};
class SimplexNumericalError : public Error {
public:
    using Error::Error;
};

// ---- oracles / game ----
class InfeasiblePartition : public Error {
public:
    using Error::Error;
};
class SolverFailure : public Error {
public:
    using Error::Error;
};

}  // namespace islanding
