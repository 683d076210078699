#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace recol {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Evaluation point outside the domain of a piecewise polynomial.
class OutOfDomain : public Error {
public:
    using Error::Error;
};

class InvalidState : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class EigensolverFailure : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Newton iteration ran out of iterations (or produced non-finite iterates).
/// Carries the last iterate and the residual norm of every iterate.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> last_iterate,
                  std::vector<double> residual_history)
        : Error(what),
          last_iterate_(std::move(last_iterate)),
          residual_history_(std::move(residual_history)) {}

    [[nodiscard]] const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    [[nodiscard]] const std::vector<double>& residual_history() const noexcept {
        return residual_history_;
    }

private:
    std::vector<double> last_iterate_;
    std::vector<double> residual_history_;
};

}  // namespace recol
