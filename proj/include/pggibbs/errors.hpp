#pragma once

#include <stdexcept>
#include <string>

namespace pggibbs {

// Numerical routine failed to converge or left its validity domain
// (series truncation, quadrature, rejection-loop cap, Cholesky breakdown).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Posterior is improper for the given data; time averages of the chain
// would be inconsistent, so sampling is refused unless overridden.
class ImproperPosteriorError : public std::runtime_error {
 public:
  explicit ImproperPosteriorError(const std::string& what)
      : std::runtime_error(what) {}
};

// A drift certificate could not be produced (empty admissible interval,
// rho1 estimation refused, or invariants failed post-construction).
class CertificateError : public std::runtime_error {
 public:
  explicit CertificateError(const std::string& what)
      : std::runtime_error(what) {}
};

// Too few draws for the requested error estimate.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed input file; the message names the offending row and column.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pggibbs
