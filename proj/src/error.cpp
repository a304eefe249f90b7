#include "easc/error.hpp"

namespace easc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Validation: return "Validation";
        case ErrorCode::OutOfBand: return "OutOfBand";
        case ErrorCode::NegativeDensity: return "NegativeDensity";
        case ErrorCode::GradientUnsupported: return "GradientUnsupported";
        case ErrorCode::ModeMismatch: return "ModeMismatch";
        case ErrorCode::NoInteriorMinimum: return "NoInteriorMinimum";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::Unbounded: return "Unbounded";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::BandTooNarrow: return "BandTooNarrow";
        case ErrorCode::RecurrenceHorizonExceeded: return "RecurrenceHorizonExceeded";
        case ErrorCode::PoorFit: return "PoorFit";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

bool is_validation(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Validation:
        case ErrorCode::OutOfBand:
        case ErrorCode::NegativeDensity:
        case ErrorCode::GradientUnsupported:
        case ErrorCode::ModeMismatch:
        case ErrorCode::StepTooLarge:
        case ErrorCode::BandTooNarrow:
        case ErrorCode::RecurrenceHorizonExceeded:
        case ErrorCode::Io:
            return true;
        default:
            return false;
    }
}

} // namespace easc
