#include "asap/error.hpp"

namespace asap {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotRowStochastic: return "NotRowStochastic";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::MissingCls: return "MissingCls";
    case ErrorCode::MalformedMeta: return "MalformedMeta";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::LayerOutOfRange: return "LayerOutOfRange";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::TauOutOfRange: return "TauOutOfRange";
    case ErrorCode::EmptyStack: return "EmptyStack";
    case ErrorCode::HistoryNotRetained: return "HistoryNotRetained";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SinkIsCls: return "SinkIsCls";
    case ErrorCode::DegeneratePhi: return "DegeneratePhi";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BadClusterCounts: return "BadClusterCounts";
    case ErrorCode::EmptyBackground: return "EmptyBackground";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::TargetExceedsInput: return "TargetExceedsInput";
    case ErrorCode::InfeasibleMargin: return "InfeasibleMargin";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

int exit_status(ErrorCode code) noexcept {
    // 1 and 2 are reserved for generic failures and argument parsing.
    return 10 + static_cast<int>(code);
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), m_code(code) {}

}  // namespace asap
