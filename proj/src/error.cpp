#include "wloo/error.hpp"

namespace wloo {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
        case Errc::Asymmetric: return "Asymmetric";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::SingularBorder: return "SingularBorder";
        case Errc::DuplicatePoints: return "DuplicatePoints";
        case Errc::UnsupportedDimension: return "UnsupportedDimension";
        case Errc::EmptyCandidates: return "EmptyCandidates";
        case Errc::TooManyPoints: return "TooManyPoints";
        case Errc::KTooLarge: return "KTooLarge";
        case Errc::SinglePoint: return "SinglePoint";
        case Errc::NoRoot: return "NoRoot";
        case Errc::DegenerateData: return "DegenerateData";
        case Errc::RankDeficient: return "RankDeficient";
        case Errc::FlatLimitSingular: return "FlatLimitSingular";
        case Errc::DegenerateConstraint: return "DegenerateConstraint";
        case Errc::WeightSimplexViolation: return "WeightSimplexViolation";
        case Errc::SingularGram: return "SingularGram";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::DomainViolation: return "DomainViolation";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ConfigError: return "ConfigError";
        case Errc::UnknownExperiment: return "UnknownExperiment";
        case Errc::IoError: return "IoError";
    }
    return "Error";
}

}  // namespace wloo
