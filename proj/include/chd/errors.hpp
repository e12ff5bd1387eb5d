#ifndef CHD_ERRORS_HPP
#define CHD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chd {

/// An iterative solve ran out of budget or stalled.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// A right-hand side outside the zero-mean space V0.
class NotInV0Error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A candidate violates the affine or box constraints of the incremental problem.
class InfeasibleError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace chd

#endif  // CHD_ERRORS_HPP
