#pragma once

#include <stdexcept>

namespace swcrt {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Design construction and lookups.
struct InvalidDesign : Error { using Error::Error; };
struct NonDivisibleAllocation : InvalidDesign { using InvalidDesign::InvalidDesign; };
struct OutOfRange : Error { using Error::Error; };

// Parameter and input validation.
struct InvalidParameter : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };
struct FamilyMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct ZeroTruth : Error { using Error::Error; };

// Model fitting.
struct SingularDesign : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct DegenerateWeight : Error { using Error::Error; };

// Variance estimation.
struct SingularBread : Error { using Error::Error; };
struct AdjustmentFailure : Error { using Error::Error; };
struct NegativeVariance : Error { using Error::Error; };

// Configuration and data files.
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct TypeError : Error { using Error::Error; };
struct ConsistencyError : Error { using Error::Error; };

}  // namespace swcrt
