#pragma once

// Joint-error metrics in camera space, root-relative space and after
// similarity Procrustes alignment, acceleration error, SO(3) geodesic
// distance and hand-scale error. Lengths in mm, ACC in m/s^2.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "raylift/error.hpp"
#include "raylift/rotation.hpp"

namespace raylift {

using JointFrame = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct JointTrajectory {
  std::vector<JointFrame> frames;
  double fps = 30.0;
  // visible[f][j]; empty means every joint is visible.
  std::vector<std::vector<bool>> visible;

  size_t num_frames() const { return frames.size(); }
  Eigen::Index num_joints() const { return frames.empty() ? 0 : frames.front().rows(); }
  bool Visible(size_t f, Eigen::Index j) const {
    return visible.empty() || visible[f][static_cast<size_t>(j)];
  }
};

namespace detail {

inline void CheckAligned(const JointTrajectory& pred, const JointTrajectory& gt) {
  if (pred.frames.size() != gt.frames.size()) {
    throw Error(ErrorCode::kShapeMismatch, "frame counts differ");
  }
  for (size_t f = 0; f < gt.frames.size(); ++f) {
    if (pred.frames[f].rows() != gt.frames[f].rows() ||
        gt.frames[f].rows() != gt.frames.front().rows()) {
      throw Error(ErrorCode::kShapeMismatch, "joint counts differ at frame " + std::to_string(f));
    }
  }
  for (const auto* t : {&pred, &gt}) {
    if (!t->visible.empty() && t->visible.size() != t->frames.size()) {
      throw Error(ErrorCode::kShapeMismatch, "visibility mask size mismatch");
    }
  }
}

inline bool BothVisible(const JointTrajectory& a, const JointTrajectory& b, size_t f,
                        Eigen::Index j) {
  return a.Visible(f, j) && b.Visible(f, j);
}

}  // namespace detail

inline JointTrajectory root_relative(const JointTrajectory& traj, int root_index) {
  JointTrajectory out = traj;
  for (size_t f = 0; f < out.frames.size(); ++f) {
    if (root_index < 0 || root_index >= out.frames[f].rows()) {
      throw Error(ErrorCode::kJointMissing, "root index out of range");
    }
    if (!traj.Visible(f, root_index)) {
      throw Error(ErrorCode::kJointMissing, "root joint masked at frame " + std::to_string(f));
    }
    const Eigen::RowVector3d root = out.frames[f].row(root_index);
    out.frames[f].rowwise() -= root;
  }
  return out;
}

inline double cs_mje(const JointTrajectory& pred, const JointTrajectory& gt) {
  detail::CheckAligned(pred, gt);
  double sum = 0.0;
  long count = 0;
  for (size_t f = 0; f < gt.frames.size(); ++f) {
    for (Eigen::Index j = 0; j < gt.frames[f].rows(); ++j) {
      if (!detail::BothVisible(pred, gt, f, j)) continue;
      sum += (pred.frames[f].row(j) - gt.frames[f].row(j)).norm();
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

inline double rs_mje(const JointTrajectory& pred, const JointTrajectory& gt, int root_index = 0) {
  detail::CheckAligned(pred, gt);
  return cs_mje(root_relative(pred, root_index), root_relative(gt, root_index));
}

struct Similarity {
  double scale = 1.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d Apply(const Eigen::Vector3d& p) const { return scale * R * p + t; }
};

// Umeyama closed form for min sum ||s R pred_j + t - gt_j||^2 with det R = +1.
inline Similarity procrustes_align(const JointFrame& pred, const JointFrame& gt) {
  if (pred.rows() != gt.rows()) throw Error(ErrorCode::kShapeMismatch, "joint counts differ");
  if (pred.rows() < 3) {
    throw Error(ErrorCode::kDegenerateConfiguration, "need at least 3 joints");
  }
  const Eigen::RowVector3d mu_p = pred.colwise().mean();
  const Eigen::RowVector3d mu_g = gt.colwise().mean();
  const JointFrame p = pred.rowwise() - mu_p;
  const JointFrame g = gt.rowwise() - mu_g;

  Eigen::JacobiSVD<JointFrame> shape_svd(p);
  const Eigen::Vector3d sv = shape_svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw Error(ErrorCode::kDegenerateConfiguration, "prediction has rank < 2");
  }

  const double n = static_cast<double>(pred.rows());
  const Eigen::Matrix3d cov = g.transpose() * p / n;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2) = -1.0;

  Similarity out;
  out.R = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const double var_p = p.squaredNorm() / n;
  out.scale = svd.singularValues().dot(s) / var_p;
  out.t = mu_g.transpose() - out.scale * out.R * mu_p.transpose();
  return out;
}

inline double ps_mje(const JointTrajectory& pred, const JointTrajectory& gt) {
  detail::CheckAligned(pred, gt);
  double sum = 0.0;
  long count = 0;
  for (size_t f = 0; f < gt.frames.size(); ++f) {
    std::vector<Eigen::Index> ids;
    for (Eigen::Index j = 0; j < gt.frames[f].rows(); ++j) {
      if (detail::BothVisible(pred, gt, f, j)) ids.push_back(j);
    }
    if (ids.empty()) continue;
    JointFrame p(ids.size(), 3), g(ids.size(), 3);
    for (size_t k = 0; k < ids.size(); ++k) {
      p.row(k) = pred.frames[f].row(ids[k]);
      g.row(k) = gt.frames[f].row(ids[k]);
    }
    const Similarity sim = procrustes_align(p, g);
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
      sum += (sim.Apply(p.row(k).transpose()) - g.row(k).transpose()).norm();
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

// Mean over frames of the per-frame joint average of
// || (a_pred - a_gt) ||, a_t = (x_{t+1} - 2 x_t + x_{t-1}) fps^2, in m/s^2.
inline double acc_error(const JointTrajectory& pred, const JointTrajectory& gt) {
  detail::CheckAligned(pred, gt);
  if (gt.frames.size() < 3) throw Error(ErrorCode::kTooShort, "ACC needs at least 3 frames");
  if (!(gt.fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  const double fps2 = gt.fps * gt.fps;
  double frame_sum = 0.0;
  long frames = 0;
  for (size_t f = 1; f + 1 < gt.frames.size(); ++f) {
    double joint_sum = 0.0;
    long joints = 0;
    for (Eigen::Index j = 0; j < gt.frames[f].rows(); ++j) {
      bool ok = true;
      for (size_t k : {f - 1, f, f + 1}) ok = ok && detail::BothVisible(pred, gt, k, j);
      if (!ok) continue;
      auto second = [&](const JointTrajectory& t) {
        return t.frames[f + 1].row(j) - 2.0 * t.frames[f].row(j) + t.frames[f - 1].row(j);
      };
      joint_sum += ((second(pred) - second(gt)) * fps2).norm();
      ++joints;
    }
    if (joints == 0) continue;
    frame_sum += joint_sum / static_cast<double>(joints);
    ++frames;
  }
  return frames ? frame_sum / static_cast<double>(frames) / 1000.0 : 0.0;
}

// Equivalent to arccos((tr(R1^T R2) - 1) / 2) clamped, evaluated through
// atan2 for accuracy near 0 and pi.
inline double geodesic_so3(const Eigen::Matrix3d& R1, const Eigen::Matrix3d& R2) {
  if (!IsRotation(R1) || !IsRotation(R2)) {
    throw Error(ErrorCode::kNotARotation, "input is not in SO(3)");
  }
  const Eigen::Matrix3d D = R1.transpose() * R2;
  const Eigen::Vector3d axis(D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1));
  return std::atan2(axis.norm(), D.trace() - 1.0);
}

inline double hand_scale_error(const JointTrajectory& pred, const JointTrajectory& gt,
                               int wrist = 0, int middle_mcp = 9) {
  detail::CheckAligned(pred, gt);
  if (gt.frames.empty()) throw Error(ErrorCode::kJointMissing, "no frames");
  const Eigen::Index nj = gt.frames.front().rows();
  if (wrist < 0 || middle_mcp < 0 || wrist >= nj || middle_mcp >= nj) {
    throw Error(ErrorCode::kJointMissing, "hand-scale joints out of range");
  }
  double sum = 0.0;
  long count = 0;
  for (size_t f = 0; f < gt.frames.size(); ++f) {
    if (!detail::BothVisible(pred, gt, f, wrist) || !detail::BothVisible(pred, gt, f, middle_mcp)) {
      continue;
    }
    const double sp = (pred.frames[f].row(wrist) - pred.frames[f].row(middle_mcp)).norm();
    const double sg = (gt.frames[f].row(wrist) - gt.frames[f].row(middle_mcp)).norm();
    sum += std::abs(sp - sg);
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kJointMissing, "hand-scale joints never visible");
  return sum / static_cast<double>(count);
}

struct MetricReport {
  double cs_mje = 0.0;
  double rs_mje = 0.0;
  double ps_mje = 0.0;
  double cs_acc = 0.0;
  double rs_acc = 0.0;
  double hand_scale_error = 0.0;
  long frames = 0;
  long joints = 0;
};

struct EvalOptions {
  int root = 0;
  int wrist = 0;
  int middle_mcp = 9;
};

inline MetricReport evaluate(const JointTrajectory& pred, const JointTrajectory& gt,
                             const EvalOptions& opts = {}) {
  detail::CheckAligned(pred, gt);
  MetricReport r;
  r.cs_mje = cs_mje(pred, gt);
  r.rs_mje = rs_mje(pred, gt, opts.root);
  r.ps_mje = ps_mje(pred, gt);
  if (gt.frames.size() >= 3) {
    r.cs_acc = acc_error(pred, gt);
    r.rs_acc = acc_error(root_relative(pred, opts.root), root_relative(gt, opts.root));
  }
  if (gt.num_joints() > std::max(opts.wrist, opts.middle_mcp)) {
    r.hand_scale_error = hand_scale_error(pred, gt, opts.wrist, opts.middle_mcp);
  }
  r.frames = static_cast<long>(gt.frames.size());
  r.joints = static_cast<long>(gt.num_joints());
  return r;
}

}  // namespace raylift
