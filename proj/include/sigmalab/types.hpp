#pragma once

#include <complex>
#include <Eigen/Dense>

namespace sigmalab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Counterclockwise rotation by 90 degrees.
inline Mat2 rotation_j() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Mat2 rotation(double angle) {
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace sigmalab
