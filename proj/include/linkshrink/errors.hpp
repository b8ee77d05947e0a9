#pragma once

#include <stdexcept>
#include <string>

namespace linkshrink {

/// Malformed or inconsistent user data (schema mismatch, zero variance,
/// unseen levels, unreadable files). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical failure that should not happen for valid inputs
/// (Cholesky breakdown, non-finite slice target). Exit code 1.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace linkshrink
