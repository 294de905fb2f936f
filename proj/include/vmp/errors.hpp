#pragma once

#include <stdexcept>
#include <string>

namespace vmp {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInput : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NonSymmetric : Error { using Error::Error; };
struct IndefiniteMatrix : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct SingularCovariance : Error { using Error::Error; };
struct InvalidWeights : Error { using Error::Error; };
struct InvalidGroupCount : Error { using Error::Error; };
struct EmptyGroup : Error { using Error::Error; };
struct DegenerateComponent : Error { using Error::Error; };
struct Diverged : Error { using Error::Error; };
struct EmptyCorpus : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct TensorTooLarge : Error { using Error::Error; };
struct FileNotFound : Error { using Error::Error; };
struct MissingColumn : Error { using Error::Error; };
struct NoUsableRows : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace vmp
