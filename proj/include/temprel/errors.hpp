#pragma once

#include <stdexcept>
#include <string>

namespace temprel {

/// Bad flags, malformed config, unknown config keys. CLI exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid corpus/window/checkpoint content. CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failures inside the tape: shape mismatch, non-finite values,
/// backward misuse. CLI exit code 3.
struct TensorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace temprel
