#pragma once

#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ringscft {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

/// Raised when a numerical precondition breaks during a solve (non-finite
/// values, singular blocks, an empty retained subspace).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// exp() that flushes results below DBL_MIN to exactly zero instead of
// returning subnormals.
inline double exp_flush(double x) {
  static const double kLogMin = std::log(DBL_MIN);
  return x < kLogMin ? 0.0 : std::exp(x);
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

}  // namespace ringscft
