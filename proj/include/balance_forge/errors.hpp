#pragma once

#include <stdexcept>

namespace balance_forge {

/// Invalid or malformed input: shape mismatches, out-of-domain values, bad files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerically degenerate computation: zero denominators, singular systems,
/// single-unit weight concentrations.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace balance_forge
