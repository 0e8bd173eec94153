#pragma once

#include <stdexcept>
#include <string>

namespace shockpinn {

/// Base class for all library errors. `exit_code()` is what the CLI returns.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

class IngestionError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// Non-finite loss or gradient during training.
class DivergenceError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 4; }
};

class AnalysisError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 5; }
};

/// Argument outside the mathematical domain of an operation (M < 1, rho <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Failure while evaluating a recorded expression (log of non-positive, 0/0, ...).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Caller broke an interface contract (mismatched tangent widths, missing tangents, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace shockpinn
