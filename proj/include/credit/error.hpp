#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace credit {

enum class ErrorCode {
    // ingest
    MissingColumn,
    DuplicateStatement,
    EmptyFile,
    NonPositivePrecision,
    CodeOverflow,
    MissingLabel,
    // features
    EmptySpec,
    VocabularyMissing,
    // gbdt
    DegenerateSampling,
    SingleClass,
    EmptyMatrix,
    MissingFeatureColumn,
    // cv_stack
    TooFewPerClass,
    LengthMismatch,
    NoMetaColumns,
    // blend
    InvalidWeights,
    SingleMember,
    // metric
    NoPositives,
    // synth
    NoSignal,
    // report
    ColumnSetMismatch,
    EmptyReport,
    // plumbing
    InvalidConfig,
    InvalidData,
    Io,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Broad failure class used to pick a process exit code.
enum class ErrorCategory { Config, Data, Training };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }
    /// Message without the error name.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace credit
