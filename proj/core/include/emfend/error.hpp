#pragma once

#include <stdexcept>
#include <string>

namespace emfend {

/// Malformed or inconsistent input data (dataset records, config files,
/// checkpoints). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric invariant was violated (non-finite values, failed gradient
/// check). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emfend
