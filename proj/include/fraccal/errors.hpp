#pragma once

#include <stdexcept>
#include <string>

namespace fraccal {

// Machine-parseable failure categories. CLI exit codes: config errors -> 1,
// numerical precondition failures -> 2, internal tolerance breaches -> 3.
enum class ErrorCode {
    EndpointNotAligned,
    RegionsTouch,
    EmptyRegion,
    InvalidOrder,
    SupportViolation,
    NearSingular,
    IncompatibleData,
    GramMismatch,
    GramNotSPD,
    TargetUnreachable,
    EmptyTarget,
    PartitionNotAligned,
    IllConditionedM,
    AbsorptionViolated,
    InadmissibleControl,
    DeltaTooLarge,
    ConfigError,
    ToleranceBreach,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what_arg)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what_arg),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EndpointNotAligned: return "EndpointNotAligned";
        case ErrorCode::RegionsTouch: return "RegionsTouch";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::InvalidOrder: return "InvalidOrder";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::NearSingular: return "NearSingular";
        case ErrorCode::IncompatibleData: return "IncompatibleData";
        case ErrorCode::GramMismatch: return "GramMismatch";
        case ErrorCode::GramNotSPD: return "GramNotSPD";
        case ErrorCode::TargetUnreachable: return "TargetUnreachable";
        case ErrorCode::EmptyTarget: return "EmptyTarget";
        case ErrorCode::PartitionNotAligned: return "PartitionNotAligned";
        case ErrorCode::IllConditionedM: return "IllConditionedM";
        case ErrorCode::AbsorptionViolated: return "AbsorptionViolated";
        case ErrorCode::InadmissibleControl: return "InadmissibleControl";
        case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ToleranceBreach: return "ToleranceBreach";
    }
    return "UnknownError";
}

}  // namespace fraccal
