#include "georeg/errors.hpp"

namespace georeg {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateMatchPair: return "DegenerateMatchPair";
        case ErrorKind::InsufficientMatches: return "InsufficientMatches";
        case ErrorKind::AllPairsDegenerate: return "AllPairsDegenerate";
        case ErrorKind::InvalidCount: return "InvalidCount";
        case ErrorKind::InvalidSpeed: return "InvalidSpeed";
        case ErrorKind::PoleSingularity: return "PoleSingularity";
        case ErrorKind::SpeedTooHigh: return "SpeedTooHigh";
        case ErrorKind::ProvisoViolated: return "ProvisoViolated";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::DegenerateDesign: return "DegenerateDesign";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::MalformedInput: return "MalformedInput";
    }
    return "Unknown";
}

}  // namespace georeg
