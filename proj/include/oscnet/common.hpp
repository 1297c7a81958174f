#ifndef OSCNET_COMMON_HPP
#define OSCNET_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oscnet {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;

/// Invalid user input or a parameter set that violates a model invariant.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical operation that cannot be completed (singular system,
/// factorization failure after jitter escalation, unstable dynamics...).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Canonicalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  if (a > pi) a -= 2.0 * pi;
  return a;
}

/// Signed difference between two angles, canonicalized to (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

inline double logsumexp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double logsumexp(const Eigen::Ref<const Vec>& xs) {
  double m = xs.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((xs.array() - m).exp().sum());
}

/// FNV-1a 64-bit hash; stable across runs and platforms.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace oscnet

#endif  // OSCNET_COMMON_HPP
