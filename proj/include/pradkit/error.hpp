#pragma once

#include <stdexcept>
#include <string>

namespace pradkit {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration: a caller mistake, not a data problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed (malformed files, empty masks,
/// out-of-range queries, degenerate pipelines).
class DataError : public Error {
 public:
  using Error::Error;
};

/// File system failures: unreadable or unwritable paths.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace pradkit
