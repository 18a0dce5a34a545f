#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asap {

enum class ErrorCode {
    // container / validation
    MagicMismatch,
    VersionUnsupported,
    ShapeMismatch,
    NotRowStochastic,
    NegativeEntry,
    MissingCls,
    MalformedMeta,
    NonFinite,
    IoFailure,
    LayerOutOfRange,
    // walk / sink
    AlphaOutOfRange,
    TauOutOfRange,
    EmptyStack,
    HistoryNotRetained,
    IndexOutOfRange,
    // geometry
    SinkIsCls,
    DegeneratePhi,
    LengthMismatch,
    TooShort,
    // reduction
    BadClusterCounts,
    EmptyBackground,
    MissingFeatures,
    TargetExceedsInput,
    // synthetic data / configuration
    InfeasibleMargin,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status used by the command line tool for a given error class.
int exit_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

}  // namespace asap
