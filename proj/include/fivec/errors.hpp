#pragma once

#include <stdexcept>
#include <string>

#include "fivec/types.hpp"

namespace fivec {

enum class ErrorKind { validation, numeric, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad input: a precondition or invariant of the data model failed.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// A computation could not produce a meaningful result.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Degenerate geometry or a singular linear system.
class DegenerateError : public NumericError {
public:
    explicit DegenerateError(const std::string& what) : NumericError(what) {}
};

/// Only a combination of the unknowns is determined by the data.
class IdentifiabilityError : public DegenerateError {
public:
    IdentifiabilityError(const std::string& what, double a_plus_2b)
        : DegenerateError(what), a_plus_2b_(a_plus_2b) {}
    double a_plus_2b() const { return a_plus_2b_; }

private:
    double a_plus_2b_;
};

/// A ray left the region where the medium is defined.
class DomainExitError : public NumericError {
public:
    DomainExitError(const std::string& what, const Vec3& hit, double t_hit)
        : NumericError(what), hit_(hit), t_hit_(t_hit) {}
    const Vec3& hit_point() const { return hit_; }
    double hit_time() const { return t_hit_; }

private:
    Vec3 hit_;
    double t_hit_;
};

/// Simulation produced non-finite or runaway fields.
class BlowUpError : public NumericError {
public:
    BlowUpError(const std::string& what, long step, double time)
        : NumericError(what), step_(step), time_(time) {}
    long step() const { return step_; }
    double time() const { return time_; }

private:
    long step_;
    double time_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace fivec
