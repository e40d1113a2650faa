#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hflow {

enum class ErrorKind {
    InvalidInput,
    SingularNetwork,
    NonConvergence,
    CollapsedVoltage,
    MissingOrder,
    ResonancePole,
    ZeroPower,
    InsufficientSamples,
    FundamentalAbsent,
    NyquistViolation,
    ZeroFundamental,
    EmptySeries,
    InternalInvariant,
};

const char* to_string(ErrorKind kind);

/// Coarse failure classes used for process exit codes.
enum class FailureClass { Input, Numerical, Internal };

FailureClass classify(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by the fundamental solve; carries the per-iteration max voltage update.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, std::vector<double> trace);

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

}  // namespace hflow
