#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace meanaic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -------------------------------------------------------------------------
// Fitting errors
// -------------------------------------------------------------------------

/// Base for errors raised while fitting one cluster.
class FitError : public Error {
public:
    using Error::Error;
};

/// The active design matrix is rank deficient.
class DegenerateDesign : public FitError {
public:
    DegenerateDesign(const std::string& what, std::vector<int> columns)
        : FitError(what), columns_(std::move(columns)) {}

    /// Design column indices (0 = intercept) that fell below the rank tolerance.
    const std::vector<int>& columns() const noexcept { return columns_; }

private:
    std::vector<int> columns_;
};

class TooFewObservations : public FitError {
public:
    using FitError::FitError;
};

/// Coefficients exploded during iteration (divergence or complete separation).
class NonFiniteIterate : public FitError {
public:
    using FitError::FitError;
};

/// A likelihood was requested outside the family's support.
class DomainError : public FitError {
public:
    using FitError::FitError;
};

class QuadratureModeFailure : public FitError {
public:
    using FitError::FitError;
};

// -------------------------------------------------------------------------
// Selection errors
// -------------------------------------------------------------------------

class LatticeTooLarge : public Error {
public:
    using Error::Error;
};

class AllClustersSkipped : public Error {
public:
    using Error::Error;
};

/// Raised by the fail-fast skip policy on the first failed (cluster, model) fit.
class SelectionAborted : public Error {
public:
    SelectionAborted(const std::string& what, std::size_t cluster, std::size_t model)
        : Error(what), cluster_(cluster), model_(model) {}
    std::size_t cluster() const noexcept { return cluster_; }
    std::size_t model() const noexcept { return model_; }

private:
    std::size_t cluster_;
    std::size_t model_;
};

// -------------------------------------------------------------------------
// Input errors
// -------------------------------------------------------------------------

/// Base for malformed input files; carries the 1-based line number when known.
class InputError : public Error {
public:
    InputError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class MissingColumn : public InputError {
public:
    using InputError::InputError;
};

class InvalidResponse : public InputError {
public:
    using InputError::InputError;
};

/// Scenario configuration problem; the message starts with the offending key path.
class ConfigError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace meanaic
