#pragma once

#include <stdexcept>
#include <string>

namespace graphprune {

// One kind per distinct failure the library reports. The CLI maps kinds to
// exit codes (usage=1, validation=2, io=3).
enum class ErrorKind {
    OddDegree,
    DegreeTooLarge,
    InfeasibleDegree,
    RetryExhausted,
    Disconnected,
    DegenerateGraph,
    InfiniteGr,
    UnsupportedDegree,
    InvalidNodeCount,
    TooFewUnits,
    MissingSpatialDims,
    NonconformingSparsity,
    ShapeMismatch,
    NotOracleMode,
    ParseError,
    InvariantViolation,
    SchemaVersionMismatch,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace graphprune
