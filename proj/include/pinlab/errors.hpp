#pragma once

#include <stdexcept>
#include <string>

namespace pinlab {

// Base class for all pinlab errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonSummableError : Error { using Error::Error; };
struct InvalidHorizonError : Error { using Error::Error; };
struct OutOfRangeError : Error { using Error::Error; };
struct NoConvergenceError : Error { using Error::Error; };
struct NotPositiveDefiniteError : Error { using Error::Error; };
struct LengthMismatchError : Error { using Error::Error; };
struct SizeMismatchError : Error { using Error::Error; };
struct TooLargeError : Error { using Error::Error; };
struct NumericalLeakError : Error { using Error::Error; };
struct DegenerateVarianceError : Error { using Error::Error; };
struct NotInvertibleError : Error { using Error::Error; };
struct StencilOutOfRangeError : Error { using Error::Error; };
struct NotBracketedError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace pinlab
