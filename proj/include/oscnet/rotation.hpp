#ifndef OSCNET_ROTATION_HPP
#define OSCNET_ROTATION_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "oscnet/common.hpp"

namespace oscnet {

/// A single damped oscillator: x_t = a * R(2*pi*f/fs) * x_{t-1} + noise.
struct OscillatorSpec {
  double a = 0.99;    // autoregressive damping, in (0,1)
  double f_hz = 0.0;  // center frequency
  double fs_hz = 1.0; // sampling frequency

  void validate() const {
    if (!(fs_hz > 0.0))
      throw validation_error("oscillator: fs must be > 0, got " +
                             std::to_string(fs_hz));
    if (!(a > 0.0 && a < 1.0))
      throw validation_error("oscillator: damping a must be in (0,1), got " +
                             std::to_string(a));
    if (!(f_hz >= 0.0 && f_hz < fs_hz / 2.0))
      throw validation_error("oscillator: f must be in [0, fs/2), got " +
                             std::to_string(f_hz));
  }

  double omega() const { return 2.0 * pi * f_hz / fs_hz; }
};

inline Eigen::Matrix2d rotation2(double psi) {
  Eigen::Matrix2d r;
  r << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
  return r;
}

/// gamma * R(psi): the constraint class for 2x2 network blocks.
struct ScaledRotation {
  double gamma = 0.0;  // nonnegative scale
  double psi = 0.0;    // radians, canonical in (-pi, pi]

  Eigen::Matrix2d realize() const { return gamma * rotation2(psi); }
};

/// 2x2 transition block of one oscillator: a * R(2*pi*f/fs).
inline Eigen::Matrix2d make_rotation_block(const OscillatorSpec& spec) {
  spec.validate();
  return spec.a * rotation2(spec.omega());
}

/// Nearest scaled rotation to an arbitrary 2x2 matrix in Frobenius norm,
/// with the scale fixed to the geometric mean of the singular values.
/// The rotation factor is U * diag(1, sign-fix) * V^T so the determinant is
/// always +1 even when U V^T would be a reflection. Rank-deficient inputs
/// give gamma = 0 (and psi = 0 for the zero matrix).
inline ScaledRotation project_scaled_rotation(const Eigen::Matrix2d& m) {
  if (m.cwiseAbs().maxCoeff() == 0.0) return {0.0, 0.0};
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector2d s = svd.singularValues();
  Eigen::Matrix2d u = svd.matrixU();
  Eigen::Matrix2d v = svd.matrixV();
  Eigen::Matrix2d rot = u * v.transpose();
  if (rot.determinant() < 0.0) {
    u.col(1) *= -1.0;  // flip the smaller singular direction
    rot = u * v.transpose();
  }
  const double gamma = std::sqrt(std::max(s(0), 0.0) * std::max(s(1), 0.0));
  const double psi = std::atan2(rot(1, 0), rot(0, 0));
  return {gamma, wrap_angle(psi)};
}

}  // namespace oscnet

#endif  // OSCNET_ROTATION_HPP
