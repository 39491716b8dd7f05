#pragma once

#include <stdexcept>
#include <string>

namespace btm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Outcome-system validation
struct DuplicateLabel : Error { using Error::Error; };
struct MissingOpposite : Error { using Error::Error; };
struct BadExponent : Error { using Error::Error; };
struct BadPairing : Error { using Error::Error; };
struct SelfOppositeNotHalf : Error { using Error::Error; };

// Model evaluation
struct SameTeam : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// Fitting / sampling
struct DegenerateData : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct TooFewChains : Error { using Error::Error; };

// Ingestion
struct BadHeader : Error { using Error::Error; };
struct UnknownOutcome : Error { using Error::Error; };
struct SelfGame : Error { using Error::Error; };
struct EmptyFile : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct InconsistentMirror : Error { using Error::Error; };
struct IncompatibleMap : Error { using Error::Error; };
struct UnknownTeam : Error { using Error::Error; };
struct MissingSamples : Error { using Error::Error; };

}  // namespace btm
