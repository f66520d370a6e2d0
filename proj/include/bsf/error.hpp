#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsf {

enum class ErrorCode {
    DenominatorNearZero,
    OutOfRange,
    UnknownDiet,
    InvalidParameters,
    InvalidInitialEnergy,
    NonFiniteState,
    StepTooLarge,
    InvalidStep,
    NumericalBlowup,
    NegativeState,
    InvalidSchedule,
    ScheduleOutOfBox,
    DegenerateRun,
    InvalidData,
    NoDescentDirection,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. All library failures are reported through it.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return code_;
    }

private:
    ErrorCode code_;
};

/// True for failures of the numerical integration (blowup, negative states, NaN).
bool is_numerical(ErrorCode code);

} // namespace bsf
