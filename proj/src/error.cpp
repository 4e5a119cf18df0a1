#include "peakload/error.hpp"

namespace peakload {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::DegenerateTail: return "DegenerateTail";
        case ErrorCode::InsufficientTail: return "InsufficientTail";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::NoValidCandidate: return "NoValidCandidate";
        case ErrorCode::BelowTail: return "BelowTail";
        case ErrorCode::InvalidAlpha: return "InvalidAlpha";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::FitMismatch: return "FitMismatch";
        case ErrorCode::TooFewReplicates: return "TooFewReplicates";
        case ErrorCode::UnstableBootstrap: return "UnstableBootstrap";
        case ErrorCode::FitDiverged: return "FitDiverged";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::QualityError: return "QualityError";
        case ErrorCode::NoCompleteBuckets: return "NoCompleteBuckets";
        case ErrorCode::NoTimestamps: return "NoTimestamps";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string_view module, const std::string& message)
    : std::runtime_error(std::string(module) + "." + std::string(to_string(code)) + ": " + message),
      code_(code),
      module_(module) {}

std::string Error::qualified_code() const {
    return module_ + "." + std::string(to_string(code_));
}

}  // namespace peakload
