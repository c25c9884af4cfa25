#pragma once

#include <stdexcept>
#include <string>

namespace latchem {

/// Argument outside the mathematical domain of a function (e.g. negative concentration).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// mu_inverse called with a rate the growth law never attains.
class NoPreimageError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Evaluation at a pole of g = 1/beta.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid parameters or configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A quantity requested in a regime where it is not defined.
class UndefinedCaseError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A root bracket that theory guarantees could not be found. Signals a bug.
class InternalInconsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Singular linear system where theory says it cannot be singular.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root finder could not bracket a sign change.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace latchem
