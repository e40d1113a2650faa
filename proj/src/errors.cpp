#include "hflow/errors.hpp"

#include <utility>

namespace hflow {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::SingularNetwork: return "SingularNetwork";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::CollapsedVoltage: return "CollapsedVoltage";
        case ErrorKind::MissingOrder: return "MissingOrder";
        case ErrorKind::ResonancePole: return "ResonancePole";
        case ErrorKind::ZeroPower: return "ZeroPower";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::FundamentalAbsent: return "FundamentalAbsent";
        case ErrorKind::NyquistViolation: return "NyquistViolation";
        case ErrorKind::ZeroFundamental: return "ZeroFundamental";
        case ErrorKind::EmptySeries: return "EmptySeries";
        case ErrorKind::InternalInvariant: return "InternalInvariant";
    }
    return "Unknown";
}

FailureClass classify(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SingularNetwork:
        case ErrorKind::NonConvergence:
        case ErrorKind::CollapsedVoltage:
        case ErrorKind::ResonancePole:
            return FailureClass::Numerical;
        case ErrorKind::InternalInvariant:
            return FailureClass::Internal;
        default:
            return FailureClass::Input;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ConvergenceError::ConvergenceError(const std::string& message, std::vector<double> trace)
    : Error(ErrorKind::NonConvergence, message), trace_(std::move(trace)) {}

}  // namespace hflow
