#include "credit/error.hpp"

namespace credit {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateStatement: return "DuplicateStatement";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::NonPositivePrecision: return "NonPositivePrecision";
    case ErrorCode::CodeOverflow: return "CodeOverflow";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptySpec: return "EmptySpec";
    case ErrorCode::VocabularyMissing: return "VocabularyMissing";
    case ErrorCode::DegenerateSampling: return "DegenerateSampling";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::MissingFeatureColumn: return "MissingFeatureColumn";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoMetaColumns: return "NoMetaColumns";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::SingleMember: return "SingleMember";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::NoSignal: return "NoSignal";
    case ErrorCode::ColumnSetMismatch: return "ColumnSetMismatch";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NonPositivePrecision:
    case ErrorCode::EmptySpec:
    case ErrorCode::DegenerateSampling:
    case ErrorCode::InvalidWeights:
    case ErrorCode::SingleMember:
    case ErrorCode::NoSignal:
    case ErrorCode::InvalidConfig:
        return ErrorCategory::Config;
    case ErrorCode::SingleClass:
    case ErrorCode::EmptyMatrix:
    case ErrorCode::TooFewPerClass:
    case ErrorCode::NoMetaColumns:
    case ErrorCode::ColumnSetMismatch:
        return ErrorCategory::Training;
    default:
        return ErrorCategory::Data;
    }
}

} // namespace credit
