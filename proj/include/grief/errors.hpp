#ifndef GRIEF_ERRORS_HPP
#define GRIEF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace grief {

// Raised when a computation produces non-finite values or a factorization
// fails beyond recovery. The CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace grief

#endif
