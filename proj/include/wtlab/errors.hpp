#pragma once

#include <stdexcept>
#include <string>

namespace wtlab {

// Bad user-supplied parameter (CLI exit code 1).
class ParamError : public std::runtime_error {
public:
    explicit ParamError(const std::string& what) : std::runtime_error(what) {}
};

// Piece budget or truncation-tail refusal (CLI exit code 2).
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

class TailRefusal : public std::runtime_error {
public:
    explicit TailRefusal(const std::string& what) : std::runtime_error(what) {}
};

// Internal consistency failure (CLI exit code 3).
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// Hilbert transform evaluated exactly at a jump of the step function.
class SingularityError : public std::domain_error {
public:
    explicit SingularityError(const std::string& what) : std::domain_error(what) {}
};

} // namespace wtlab
