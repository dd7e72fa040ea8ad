#ifndef SATPOS_ERRORS_HPP
#define SATPOS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace satpos {

/// G^T G is rank deficient or too ill-conditioned to invert (S < 4 or
/// condition number above kMaxCondition).
class SingularGeometry : public std::runtime_error {
 public:
  explicit SingularGeometry(const std::string& what) : std::runtime_error(what) {}
};

/// Ambiguity resolution requested with a zero carrier wavelength.
class WavelengthZero : public std::invalid_argument {
 public:
  WavelengthZero() : std::invalid_argument("ambiguity resolution needs wavelength > 0") {}
};

/// Bayes covariance prediction requested without an h value.
class MissingH : public std::invalid_argument {
 public:
  MissingH() : std::invalid_argument("Bayes covariance prediction needs h_M") {}
};

class InvalidConfig : public std::invalid_argument {
 public:
  explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace satpos

#endif  // SATPOS_ERRORS_HPP
