#include "gscan/error.hpp"

namespace gscan {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MalformedAst: return "MalformedAst";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::MalformedSpan: return "MalformedSpan";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorCode::OrphanJump: return "OrphanJump";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::BadRatios: return "BadRatios";
    case ErrorCode::CompilerUnavailable: return "CompilerUnavailable";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string_view module, const std::string& message)
    : std::runtime_error(std::string(module) + ": " + std::string(to_string(code)) + ": " + message)
    , code_(code)
    , module_(module)
{}

} // namespace gscan
