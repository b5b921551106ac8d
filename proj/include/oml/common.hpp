#ifndef OML_COMMON_HPP
#define OML_COMMON_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace oml {

using Vec = Eigen::VectorXd;

// Error taxonomy. Every public operation throws one of these; the CLI maps
// them onto exit codes.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string(what) + " is not finite");
}

}  // namespace oml

#endif  // OML_COMMON_HPP
