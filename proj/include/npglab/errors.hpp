#pragma once

#include <stdexcept>
#include <string>

namespace npglab {

// Error taxonomy used across the library. The C API maps each type to an
// error code; everything else surfaces as NPG_ERR_INTERNAL.

struct InvalidArgument : std::runtime_error {
  explicit InvalidArgument(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite logits / overflowed updates. Carries enough context to locate
// the failing step when thrown from a run loop.
struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

struct SolveFailure : std::runtime_error {
  explicit SolveFailure(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateInstance : std::runtime_error {
  explicit DegenerateInstance(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyWindow : std::runtime_error {
  explicit EmptyWindow(const std::string& what) : std::runtime_error(what) {}
};

struct SaturatedTrace : std::runtime_error {
  explicit SaturatedTrace(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace npglab
