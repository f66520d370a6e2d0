#include "bsf/error.hpp"

namespace bsf {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DenominatorNearZero:
        return "DenominatorNearZero";
    case ErrorCode::OutOfRange:
        return "OutOfRange";
    case ErrorCode::UnknownDiet:
        return "UnknownDiet";
    case ErrorCode::InvalidParameters:
        return "InvalidParameters";
    case ErrorCode::InvalidInitialEnergy:
        return "InvalidInitialEnergy";
    case ErrorCode::NonFiniteState:
        return "NonFiniteState";
    case ErrorCode::StepTooLarge:
        return "StepTooLarge";
    case ErrorCode::InvalidStep:
        return "InvalidStep";
    case ErrorCode::NumericalBlowup:
        return "NumericalBlowup";
    case ErrorCode::NegativeState:
        return "NegativeState";
    case ErrorCode::InvalidSchedule:
        return "InvalidSchedule";
    case ErrorCode::ScheduleOutOfBox:
        return "ScheduleOutOfBox";
    case ErrorCode::DegenerateRun:
        return "DegenerateRun";
    case ErrorCode::InvalidData:
        return "InvalidData";
    case ErrorCode::NoDescentDirection:
        return "NoDescentDirection";
    case ErrorCode::ConfigError:
        return "ConfigError";
    case ErrorCode::IoError:
        return "IoError";
    }
    return "Unknown";
}

bool is_numerical(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DenominatorNearZero:
    case ErrorCode::NonFiniteState:
    case ErrorCode::NumericalBlowup:
    case ErrorCode::NegativeState:
    case ErrorCode::DegenerateRun:
    case ErrorCode::NoDescentDirection:
        return true;
    default:
        return false;
    }
}

} // namespace bsf
