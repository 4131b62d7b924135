#pragma once

#include <stdexcept>
#include <string>

namespace wloo {

enum class Errc {
    NotPositiveDefinite,
    Asymmetric,
    DimensionMismatch,
    SingularBorder,
    DuplicatePoints,
    UnsupportedDimension,
    EmptyCandidates,
    TooManyPoints,
    KTooLarge,
    SinglePoint,
    NoRoot,
    DegenerateData,
    RankDeficient,
    FlatLimitSingular,
    DegenerateConstraint,
    WeightSimplexViolation,
    SingularGram,
    EmptyInput,
    DomainViolation,
    InvalidArgument,
    ConfigError,
    UnknownExperiment,
    IoError,
};

const char* errc_name(Errc c);

// Config, IO and experiment-id errors are user errors; everything else is numerical.
inline bool is_user_error(Errc c) {
    return c == Errc::ConfigError || c == Errc::UnknownExperiment || c == Errc::IoError;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace wloo
