/**
 * @file error.hpp
 * @brief Error type shared by every gscan module.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gscan {

enum class ErrorCode {
    MalformedAst,
    UnsupportedVersion,
    MissingReference,
    MalformedSpan,
    InvalidEncoding,
    SpanOutOfBounds,
    OrphanJump,
    UnknownKind,
    ShapeMismatch,
    NonFiniteValue,
    LengthMismatch,
    EmptyDataset,
    DivergedLoss,
    EmptyEvaluation,
    BadRatios,
    CompilerUnavailable,
    BadCheckpoint,
    SchemaMismatch,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure carries a code and the module that raised it so the CLI can
/// report provenance.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, std::string_view module, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    std::string_view module() const noexcept { return module_; }

private:
    ErrorCode code_;
    std::string_view module_;
};

} // namespace gscan
