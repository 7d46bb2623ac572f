#pragma once

#include <stdexcept>
#include <string>

namespace vpr {

// Structured failure classes. The CLI maps these onto distinct exit codes,
// so every throw site must pick the code that names the actual failure.
enum class ErrorCode {
    // validation / data consistency
    DuplicateId,
    IdMismatch,
    DimensionMismatch,
    NonFiniteValue,
    MixedDimensions,
    KTooLarge,
    EmptyMatches,
    NeedTwoNeighbors,
    MissingDensity,
    ZeroWeightSum,
    EmptyTrainingSet,
    SingleClassTraining,
    LengthMismatch,
    MissingQueryPose,
    NoPositives,
    NonFiniteScore,
    QueryCoverageMismatch,
    DuplicateQueryId,
    // file parsing
    BadMagic,
    TruncatedPayload,
    ParseError,
    // configuration
    InvalidPartition,
    InvalidConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace vpr
