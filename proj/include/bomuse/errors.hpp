#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bomuse {

/// Caller supplied something malformed: wrong dimension, empty data, unknown name.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point outside the search box; carries the first offending dimension.
class OutOfBoundsError : public InputError {
public:
    OutOfBoundsError(const std::string& what, int dimension, double value, double lower, double upper)
        : InputError(what), dimension(dimension), value(value), lower(lower), upper(upper) {}

    int dimension;
    double value;
    double lower;
    double upper;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation not valid in the current lifecycle phase.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Uniqueness violation, e.g. a session id that already exists.
class ConflictError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The service could not start (e.g. the port is taken).
class StartupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedConfiguration : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization failed even after jitter escalation.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::vector<double> jitter_levels)
        : std::runtime_error(what), jitter_levels_(std::move(jitter_levels)) {}

    [[nodiscard]] const std::vector<double>& jitter_levels() const noexcept { return jitter_levels_; }

private:
    std::vector<double> jitter_levels_;
};

/// An objective evaluation failed (subprocess died, HTTP callback errored...).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bomuse
