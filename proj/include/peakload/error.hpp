#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peakload {

enum class ErrorCode {
    EmptyInput,
    InvalidValue,
    DegenerateTail,
    InsufficientTail,
    InsufficientData,
    NoValidCandidate,
    BelowTail,
    InvalidAlpha,
    InvalidArgument,
    FitMismatch,
    TooFewReplicates,
    UnstableBootstrap,
    FitDiverged,
    SchemaError,
    QualityError,
    NoCompleteBuckets,
    NoTimestamps,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. Carries the module
/// that raised it so callers can report "module.Code" identifiers.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string_view module, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

    /// "powerlaw.BelowTail" style identifier.
    std::string qualified_code() const;

private:
    ErrorCode code_;
    std::string module_;
};

}  // namespace peakload
