#ifndef OPMOD_ERRORS_HPP
#define OPMOD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace opmod {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments, bad configuration, malformed input files.
struct ConfigError : Error {
    using Error::Error;
};

// Data-dependent failures detected while computing.
struct NumericalError : Error {
    using Error::Error;
};

struct InvalidParameter : ConfigError {
    using ConfigError::ConfigError;
};

struct DimensionMismatch : ConfigError {
    using ConfigError::ConfigError;
};

struct InsufficientMoments : ConfigError {
    using ConfigError::ConfigError;
};

struct InsufficientInitialMoments : ConfigError {
    using ConfigError::ConfigError;
};

struct ZeroPivot : NumericalError {
    int row;
    explicit ZeroPivot(int row_, const std::string& msg) : NumericalError(msg), row(row_) {}
};

struct NotPositiveDefinite : NumericalError {
    int step;
    explicit NotPositiveDefinite(int step_, const std::string& msg)
        : NumericalError(msg), step(step_) {}
};

struct IrreducibilityViolated : NumericalError {
    int step;
    explicit IrreducibilityViolated(int step_, const std::string& msg)
        : NumericalError(msg), step(step_) {}
};

struct MomentsNotBandLimited : NumericalError {
    using NumericalError::NumericalError;
};

struct NonFiniteEntry : NumericalError {
    int row, col;
    NonFiniteEntry(int row_, int col_, const std::string& msg)
        : NumericalError(msg), row(row_), col(col_) {}
};

struct RankExceedsHalfBlock : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace opmod

#endif
