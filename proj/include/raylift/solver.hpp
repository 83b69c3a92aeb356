#pragma once

// Ray space solver: closed-form, confidence-weighted point-to-ray least
// squares for the camera-space translation shared by a rigid joint set.
//
//   E(t) = sum_i w_i || Pi_i (t + J_i) ||^2,   Pi_i = I - d_i d_i^T
//   (M + eps I) t = -m,   M = sum_i w_i Pi_i,   m = sum_i w_i Pi_i J_i
//
// When the system is ill-conditioned the weights are repeatedly halved
// (by default) while eps stays fixed, which raises the relative strength of
// the regularizer.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "raylift/camera.hpp"
#include "raylift/error.hpp"

namespace raylift {

struct Correspondence {
  Eigen::Vector3d joint = Eigen::Vector3d::Zero();  // root-relative, mm
  Eigen::Vector3d ray = Eigen::Vector3d::UnitZ();   // unit bearing
  double weight = 1.0;
};

struct SolverConfig {
  double epsilon = 1e-12;
  double kappa_max = 1e6;
  double damping = 0.5;
  int max_damp_rounds = 10;

  void Validate() const {
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
    if (!(kappa_max > 1.0)) throw Error(ErrorCode::kInvalidArgument, "kappa_max must be > 1");
    if (!(damping > 0.0 && damping < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "damping must lie in (0, 1)");
    }
    if (max_damp_rounds < 0) {
      throw Error(ErrorCode::kInvalidArgument, "max_damp_rounds must be >= 0");
    }
  }
};

struct FrameEstimate {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  std::vector<double> lambdas;  // optimal depth per correspondence, mm
  double energy = 0.0;          // E(t) under the caller's weights, mm^2
  int damp_rounds = 0;
  double kappa = 1.0;           // condition number of the solved system
};

inline Eigen::Matrix3d projector(const Eigen::Vector3d& d) {
  return Eigen::Matrix3d::Identity() - d * d.transpose();
}

inline Eigen::Vector3d residual(const Eigen::Vector3d& t, const Correspondence& c) {
  return projector(c.ray) * (t + c.joint);
}

inline double energy(const Eigen::Vector3d& t, std::span<const Correspondence> corrs) {
  double e = 0.0;
  for (const auto& c : corrs) e += c.weight * residual(t, c).squaredNorm();
  return e;
}

// lambda_max / lambda_min of a symmetric 3x3 matrix; +inf when singular.
inline double condition_number(const Eigen::Matrix3d& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
  eig.computeDirect(sym, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (ev(0) < 1e-300) return std::numeric_limits<double>::infinity();
  return ev(2) / ev(0);
}

inline FrameEstimate solve_translation(std::span<const Correspondence> corrs,
                                       const SolverConfig& cfg = {}) {
  cfg.Validate();
  if (corrs.size() < 2) {
    throw Error(ErrorCode::kTooFewCorrespondences,
                "need at least 2 correspondences, got " + std::to_string(corrs.size()));
  }

  std::vector<Eigen::Matrix3d> projectors;
  projectors.reserve(corrs.size());
  for (const auto& c : corrs) {
    if (!(c.weight > 0.0)) throw Error(ErrorCode::kInvalidArgument, "weights must be > 0");
    projectors.push_back(projector(c.ray));
  }

  const Eigen::Matrix3d reg = cfg.epsilon * Eigen::Matrix3d::Identity();
  double scale = 1.0;
  FrameEstimate est;
  Eigen::Matrix3d system;
  Eigen::Vector3d rhs;
  for (int round = 0;; ++round) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < corrs.size(); ++i) {
      const double w = scale * corrs[i].weight;
      M += w * projectors[i];
      m += w * projectors[i] * corrs[i].joint;
    }
    system = M + reg;
    rhs = -m;
    est.kappa = condition_number(system);
    est.damp_rounds = round;
    if (est.kappa < cfg.kappa_max || round == cfg.max_damp_rounds) break;
    scale *= cfg.damping;
  }

  est.t = system.ldlt().solve(rhs);
  est.energy = energy(est.t, corrs);
  if (est.kappa >= cfg.kappa_max && !(std::isfinite(est.energy) && est.t.allFinite())) {
    throw Error(ErrorCode::kDegenerate, "system stays singular after weight damping");
  }
  est.lambdas.reserve(corrs.size());
  for (const auto& c : corrs) est.lambdas.push_back(c.ray.dot(est.t + c.joint));
  return est;
}

struct Keypoint {
  double u = 0.0;
  double v = 0.0;
  double confidence = 1.0;
};

struct LiftResult {
  FrameEstimate estimate;
  std::vector<Eigen::Vector3d> joints;  // camera-space, every input joint
  std::vector<int> used;                // input index of each correspondence
  std::vector<int> behind_camera;       // input indices with negative depth
};

// Keypoints outside the image, with non-positive confidence, or that the
// camera model cannot unproject are excluded before solving.
inline LiftResult lift_frame(const CalibratedCamera& cam, std::span<const Keypoint> keypoints,
                             std::span<const Eigen::Vector3d> rel_joints,
                             const SolverConfig& cfg = {}) {
  if (keypoints.size() != rel_joints.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "keypoints and joints differ in length");
  }
  LiftResult out;
  std::vector<Correspondence> corrs;
  corrs.reserve(keypoints.size());
  for (size_t i = 0; i < keypoints.size(); ++i) {
    const Keypoint& kp = keypoints[i];
    if (!(kp.confidence > 0.0) || !cam.InImage(kp.u, kp.v)) continue;
    Eigen::Vector3d ray;
    try {
      ray = cam.UnprojectRay(kp.u, kp.v);
    } catch (const Error&) {
      continue;
    }
    corrs.push_back({rel_joints[i], ray, kp.confidence});
    out.used.push_back(static_cast<int>(i));
  }
  if (corrs.empty()) throw Error(ErrorCode::kAllKeypointsMasked, "no usable keypoints");

  out.estimate = solve_translation(corrs, cfg);
  out.joints.reserve(rel_joints.size());
  for (const auto& j : rel_joints) out.joints.push_back(out.estimate.t + j);
  for (size_t k = 0; k < out.used.size(); ++k) {
    if (out.estimate.lambdas[k] < 0.0) out.behind_camera.push_back(out.used[k]);
  }
  return out;
}

}  // namespace raylift
