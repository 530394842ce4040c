#ifndef OFEM_ERRORS_HPP
#define OFEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ofem {

/// Thrown when an iterative or adaptive numerical scheme fails to reach its
/// tolerance.  Carries the best available estimate so callers can report how
/// far off the result was instead of discarding it silently.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double residual)
      : std::runtime_error(what), estimate_(estimate), residual_(residual) {}

  double estimate() const { return estimate_; }
  double residual() const { return residual_; }

 private:
  double estimate_;
  double residual_;
};

}  // namespace ofem

#endif
