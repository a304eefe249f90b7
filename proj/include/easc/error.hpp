// error.hpp: Error type shared by every easc module

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace easc {

enum class ErrorCode {
    Validation,
    OutOfBand,
    NegativeDensity,
    GradientUnsupported,
    ModeMismatch,
    NoInteriorMinimum,
    NotConverged,
    Unbounded,
    StepTooLarge,
    InvariantViolation,
    BandTooNarrow,
    RecurrenceHorizonExceeded,
    PoorFit,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Validation-type errors map to CLI exit code 2, everything else to 3.
bool is_validation(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace easc
