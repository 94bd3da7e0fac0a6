#pragma once

#include <stdexcept>
#include <string>

namespace plc {

// Bad inputs or artifacts: malformed files, missing data, version or
// fingerprint mismatches.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failures during training or evaluation (non-finite loss etc.).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace plc
