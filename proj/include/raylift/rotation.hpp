#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "raylift/error.hpp"

namespace raylift {

using Vector6d = Eigen::Matrix<double, 6, 1>;

inline Eigen::Matrix3d RotX(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
inline Eigen::Matrix3d RotY(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
inline Eigen::Matrix3d RotZ(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

inline bool IsRotation(const Eigen::Matrix3d& R, double tol = 1e-6) {
  return R.allFinite() &&
         (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol &&
         R.determinant() > 0.0;
}

// Uniform sample from SO(3) (Shoemake).
template <typename Rng>
Eigen::Matrix3d RandomRotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// First two columns of R stacked, the inverse of rot6d_to_matrix on SO(3).
inline Vector6d MatrixToRot6d(const Eigen::Matrix3d& R) {
  Vector6d r;
  r << R.col(0), R.col(1);
  return r;
}

// Gram-Schmidt on the two 3-vectors; the third column is their cross product.
inline Eigen::Matrix3d rot6d_to_matrix(const Vector6d& r) {
  const Eigen::Vector3d a1 = r.head<3>();
  const Eigen::Vector3d a2 = r.tail<3>();
  const double n1 = a1.norm();
  if (!(n1 > 1e-12)) throw Error(ErrorCode::kDegenerateInput, "first 6D column is zero");
  const Eigen::Vector3d b1 = a1 / n1;
  const Eigen::Vector3d u2 = a2 - b1.dot(a2) * b1;
  const double n2 = u2.norm();
  if (!(n2 > 1e-12 * std::max(1.0, a2.norm()))) {
    throw Error(ErrorCode::kDegenerateInput, "6D columns are parallel or zero");
  }
  const Eigen::Vector3d b2 = u2 / n2;
  Eigen::Matrix3d R;
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = b1.cross(b2);
  return R;
}

inline Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

// Pulls a gradient dL/dR (3x3) back to dL/dr for the 6D parameterization.
inline Vector6d Rot6dBackward(const Vector6d& r, const Eigen::Matrix3d& dR) {
  const Eigen::Vector3d a1 = r.head<3>();
  const Eigen::Vector3d a2 = r.tail<3>();
  const double n1 = a1.norm();
  const Eigen::Vector3d b1 = a1 / n1;
  const Eigen::Vector3d u2 = a2 - b1.dot(a2) * b1;
  const double n2 = u2.norm();
  const Eigen::Vector3d b2 = u2 / n2;
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();

  // b3 = b1 x b2  =>  db3 = -[b2]x db1 + [b1]x db2
  Eigen::Vector3d g1 = dR.col(0) + (-Skew(b2)).transpose() * dR.col(2);
  const Eigen::Vector3d g2 = dR.col(1) + Skew(b1).transpose() * dR.col(2);

  const Eigen::Matrix3d db2_du2 = (I - b2 * b2.transpose()) / n2;
  const Eigen::Vector3d gu2 = db2_du2.transpose() * g2;
  // u2 = a2 - (b1 . a2) b1
  const Eigen::Matrix3d du2_da2 = I - b1 * b1.transpose();
  const Eigen::Matrix3d du2_db1 = -(b1 * a2.transpose() + b1.dot(a2) * I);
  g1 += du2_db1.transpose() * gu2;
  const Eigen::Matrix3d db1_da1 = (I - b1 * b1.transpose()) / n1;

  Vector6d g;
  g.head<3>() = db1_da1.transpose() * g1;
  g.tail<3>() = du2_da2.transpose() * gu2;
  return g;
}

struct SwingTwist {
  Eigen::Matrix3d swing;  // "swirl": tilts the longitudinal axis
  Eigen::Matrix3d twist;  // rotation about local z
};

// R = swing * twist with twist about e_z. The twist is the projection of the
// quaternion onto the z axis; a 180-degree swing leaves no z component and
// the twist falls back to identity.
inline SwingTwist swing_twist(const Eigen::Matrix3d& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  Eigen::Quaterniond twist(q.w(), 0.0, 0.0, q.z());
  const double n = std::hypot(q.w(), q.z());
  if (n < 1e-12) {
    twist = Eigen::Quaterniond::Identity();
  } else {
    twist.coeffs() /= n;
  }
  SwingTwist out;
  out.twist = twist.toRotationMatrix();
  out.swing = R * out.twist.transpose();
  return out;
}

}  // namespace raylift
