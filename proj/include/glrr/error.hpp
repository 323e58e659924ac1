// Error types shared by all glrr modules.
#pragma once

#include <stdexcept>
#include <string>

namespace glrr {

// Bad caller input: shape mismatches, non-finite data, degenerate sizes.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An input file does not match the documented schema.
struct SchemaError : InvalidInput {
  using InvalidInput::InvalidInput;
};

// A numerical routine failed: SVD non-convergence, diverging iterates,
// an SMO run that exhausts its update budget.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pearson correlation of a constant vector. Callers that aggregate scores
// treat this as a missing value, never as zero.
struct UndefinedCorrelation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace glrr
