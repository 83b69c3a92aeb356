#pragma once

// Two-stage forearm fitting to a target point cloud: ring-based
// initialization, a pose stage over (6D rotation, translation) and a shape
// stage over (r1, r2, h, rho), both driven by Chamfer objectives and Adam.
// Also trains the linear PCA shape space.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "raylift/error.hpp"
#include "raylift/farm.hpp"
#include "raylift/optim.hpp"
#include "raylift/rotation.hpp"

namespace raylift {

using PointSet = std::vector<Eigen::Vector3d>;

namespace detail {

// Nearest neighbours in both directions from one pass over all pairs.
struct NearestPairs {
  std::vector<int> a_to_b;
  std::vector<double> a_dist2;
  std::vector<int> b_to_a;
  std::vector<double> b_dist2;
};

inline NearestPairs FindNearest(std::span<const Eigen::Vector3d> a,
                                std::span<const Eigen::Vector3d> b) {
  NearestPairs nn;
  const double inf = std::numeric_limits<double>::infinity();
  nn.a_to_b.assign(a.size(), -1);
  nn.a_dist2.assign(a.size(), inf);
  nn.b_to_a.assign(b.size(), -1);
  nn.b_dist2.assign(b.size(), inf);
  for (size_t i = 0; i < a.size(); ++i) {
    const Eigen::Vector3d& p = a[i];
    double best = inf;
    int best_j = -1;
    for (size_t j = 0; j < b.size(); ++j) {
      const double d2 = (p - b[j]).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_j = static_cast<int>(j);
      }
      if (d2 < nn.b_dist2[j]) {
        nn.b_dist2[j] = d2;
        nn.b_to_a[j] = static_cast<int>(i);
      }
    }
    nn.a_to_b[i] = best_j;
    nn.a_dist2[i] = best;
  }
  return nn;
}

}  // namespace detail

// Symmetric mean of squared nearest-neighbour distances (mm^2). If grad_a is
// given it receives d/dA with correspondences held fixed.
inline double chamfer(std::span<const Eigen::Vector3d> a, std::span<const Eigen::Vector3d> b,
                      std::vector<Eigen::Vector3d>* grad_a = nullptr) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptySet, "chamfer of an empty set");
  const auto nn = detail::FindNearest(a, b);
  double sa = 0.0, sb = 0.0;
  for (double d : nn.a_dist2) sa += d;
  for (double d : nn.b_dist2) sb += d;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  if (grad_a) {
    grad_a->assign(a.size(), Eigen::Vector3d::Zero());
    for (size_t i = 0; i < a.size(); ++i) {
      (*grad_a)[i] += 2.0 / na * (a[i] - b[nn.a_to_b[i]]);
    }
    for (size_t j = 0; j < b.size(); ++j) {
      const int i = nn.b_to_a[j];
      (*grad_a)[i] += 2.0 / nb * (a[i] - b[j]);
    }
  }
  return sa / na + sb / nb;
}

struct FitWeights {
  double pose_ring = 100.0;  // lambda_k
  double pose_full = 10.0;   // lambda_v
  double shape_ring = 10.0;  // alpha_k
  double shape_full = 1.0;   // alpha_v
  double shape_vol = 1.0;    // alpha_vol
  double shape_taper = -0.1; // alpha_dr, negative as published
  double shape_r1 = 0.01;
  double shape_r2 = 0.01;
};

struct FitConfig {
  FitWeights weights;
  OptimConfig optim;
  double pose_lr = 0.1;
  double shape_lr_base = 0.001;  // r1, r2, h
  double shape_lr_rho = 0.01;
  int n_theta = kDefaultNTheta;
  int n_z = kDefaultNz;
  double min_radius = 0.5;
  // Defaults to the frusta volume of the ring-initialized shape.
  std::optional<double> target_volume;
};

struct FarmPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

struct RingInit {
  double h = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // elbow -> wrist
  Eigen::Vector3d elbow_centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d wrist_centroid = Eigen::Vector3d::Zero();
  FarmPose pose;  // places the mesh base on the elbow centroid
};

namespace detail {

inline Eigen::Vector3d Centroid(std::span<const Eigen::Vector3d> pts) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

inline void CheckRing(std::span<const Eigen::Vector3d> ring, const char* name) {
  if (ring.size() < 3) {
    throw Error(ErrorCode::kDegenerateRing, std::string(name) + " ring has < 3 points");
  }
  const Eigen::Vector3d c = Centroid(ring);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : ring) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2)) {
    throw Error(ErrorCode::kDegenerateRing, std::string(name) + " ring is collinear");
  }
}

// FARM-frame translation so the unposed base (origin) lands on `base` after
// rotating about the mid point (0, 0, h/2).
inline Eigen::Vector3d BaseTranslation(const Eigen::Matrix3d& R, double h,
                                       const Eigen::Vector3d& base) {
  const Eigen::Vector3d c(0.0, 0.0, 0.5 * h);
  return base + R * c - c;
}

}  // namespace detail

inline RingInit init_from_rings(std::span<const Eigen::Vector3d> elbow_ring,
                                std::span<const Eigen::Vector3d> wrist_ring) {
  detail::CheckRing(elbow_ring, "elbow");
  detail::CheckRing(wrist_ring, "wrist");
  RingInit out;
  out.elbow_centroid = detail::Centroid(elbow_ring);
  out.wrist_centroid = detail::Centroid(wrist_ring);
  const Eigen::Vector3d span_vec = out.wrist_centroid - out.elbow_centroid;
  out.h = span_vec.norm();
  if (!(out.h > 1e-6)) throw Error(ErrorCode::kDegenerateRing, "ring centroids coincide");

  // Principal direction of both rings about their common centroid.
  PointSet all(elbow_ring.begin(), elbow_ring.end());
  all.insert(all.end(), wrist_ring.begin(), wrist_ring.end());
  const Eigen::Vector3d c = detail::Centroid(all);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : all) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d axis = eig.eigenvectors().col(2).normalized();
  if (axis.dot(span_vec) < 0.0) axis = -axis;
  out.axis = axis;

  auto mean_radius = [&](std::span<const Eigen::Vector3d> ring) {
    double sum = 0.0;
    for (const auto& p : ring) {
      const Eigen::Vector3d d = p - c;
      sum += (d - d.dot(axis) * axis).norm();
    }
    return sum / static_cast<double>(ring.size());
  };
  out.r1 = mean_radius(elbow_ring);
  out.r2 = mean_radius(wrist_ring);

  out.pose.rotation =
      Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), axis).toRotationMatrix();
  out.pose.t = detail::BaseTranslation(out.pose.rotation, out.h, out.elbow_centroid);
  return out;
}

// Pose-stage objective over x = [rot6d (6), t (3)] with the shape fixed.
class PoseObjective {
 public:
  PoseObjective(const FarmShape& shape, int n_theta, std::span<const Eigen::Vector3d> target_rings,
                std::span<const Eigen::Vector3d> target_full, const FitWeights& w)
      : target_rings_(target_rings), target_full_(target_full), w_(w) {
    const FarmMesh mesh = build_mesh(shape, n_theta);
    center_ = mesh.joints.mid;
    rings_ = mesh.BoundaryRings();
    surface_ = mesh.SurfacePoints();
  }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const Vector6d r = x.head<6>();
    const Eigen::Vector3d t = x.segment<3>(6);
    const Eigen::Matrix3d R = rot6d_to_matrix(r);
    Eigen::Matrix3d dR = Eigen::Matrix3d::Zero();
    Eigen::Vector3d dt = Eigen::Vector3d::Zero();
    double loss = 0.0;
    auto term = [&](const PointSet& local, std::span<const Eigen::Vector3d> target, double weight) {
      if (weight == 0.0) return;
      PointSet posed(local.size());
      for (size_t k = 0; k < local.size(); ++k) posed[k] = R * (local[k] - center_) + center_ + t;
      std::vector<Eigen::Vector3d> g;
      loss += weight * chamfer(posed, target, grad ? &g : nullptr);
      if (!grad) return;
      for (size_t k = 0; k < local.size(); ++k) {
        dR += weight * g[k] * (local[k] - center_).transpose();
        dt += weight * g[k];
      }
    };
    term(rings_, target_rings_, w_.pose_ring);
    term(surface_, target_full_, w_.pose_full);
    if (grad) {
      grad->resize(9);
      grad->head<6>() = Rot6dBackward(r, dR);
      grad->segment<3>(6) = dt;
    }
    return loss;
  }

 private:
  std::span<const Eigen::Vector3d> target_rings_;
  std::span<const Eigen::Vector3d> target_full_;
  FitWeights w_;
  Eigen::Vector3d center_;
  PointSet rings_;
  PointSet surface_;
};

// Shape-stage objective over x = [r1, r2, h, rho...] with the pose fixed.
class ShapeObjective {
 public:
  ShapeObjective(const FarmPose& pose, int n_theta, int n_z,
                 std::span<const Eigen::Vector3d> target_rings,
                 std::span<const Eigen::Vector3d> target_full, const FitWeights& w,
                 double target_volume, double r1_anchor, double r2_anchor)
      : R_(swing_twist(pose.rotation).swing),
        t_(pose.t),
        n_theta_(n_theta),
        n_z_(n_z),
        target_rings_(target_rings),
        target_full_(target_full),
        w_(w),
        target_volume_(target_volume),
        r1_anchor_(r1_anchor),
        r2_anchor_(r2_anchor) {}

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    if (x.size() != 3 + n_z_) throw Error(ErrorCode::kDimensionMismatch, "shape vector size");
    const FarmShape shape = FarmShape::FromVector(x);
    const FarmMesh mesh = build_mesh(shape, n_theta_);
    const int n_ring = n_theta_ * n_z_;
    const Eigen::Vector3d c = mesh.joints.mid;
    const Eigen::Vector3d t_eff = c + t_ - R_ * c;  // posed = R v + t_eff

    // Posed surface; rings are a subset addressed by surface index.
    PointSet surface(n_ring + 2);
    for (int k = 0; k < n_ring + 2; ++k) surface[k] = R_ * mesh.vertices[k] + t_eff;
    std::vector<int> ring_ids;
    for (int i = 0; i < n_theta_; ++i) ring_ids.push_back(mesh.RingIndex(i, 0));
    for (int i = 0; i < n_theta_; ++i) ring_ids.push_back(mesh.RingIndex(i, n_z_ - 1));
    PointSet rings;
    for (int id : ring_ids) rings.push_back(surface[id]);

    std::vector<Eigen::Vector3d> g_surface(surface.size(), Eigen::Vector3d::Zero());
    double loss = 0.0;
    std::vector<Eigen::Vector3d> g;
    if (w_.shape_ring != 0.0) {
      loss += w_.shape_ring * chamfer(rings, target_rings_, grad ? &g : nullptr);
      if (grad) {
        for (size_t k = 0; k < ring_ids.size(); ++k) g_surface[ring_ids[k]] += w_.shape_ring * g[k];
      }
    }
    if (w_.shape_full != 0.0) {
      loss += w_.shape_full * chamfer(surface, target_full_, grad ? &g : nullptr);
      if (grad) {
        for (size_t k = 0; k < surface.size(); ++k) g_surface[k] += w_.shape_full * g[k];
      }
    }

    const double vol = volume_frusta(shape);
    const double dvol = vol - target_volume_;
    const double dr = shape.r2 - shape.r1;
    loss += w_.shape_vol * std::abs(dvol) + w_.shape_taper * std::abs(dr) +
            w_.shape_r1 * std::abs(shape.r1 - r1_anchor_) +
            w_.shape_r2 * std::abs(shape.r2 - r2_anchor_);
    if (!grad) return loss;

    // Gradient w.r.t. per-level radii r_j and length h.
    Eigen::VectorXd g_radius = Eigen::VectorXd::Zero(n_z_);
    double g_h = 0.0;
    const Eigen::Vector3d dc_dh(0.0, 0.0, 0.5);
    const Eigen::Vector3d dteff_dh = dc_dh - R_ * dc_dh;
    for (int j = 0; j < n_z_; ++j) {
      const double frac = static_cast<double>(j) / (n_z_ - 1);
      for (int i = 0; i < n_theta_; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / n_theta_;
        const Eigen::Vector3d& gk = g_surface[mesh.RingIndex(i, j)];
        g_radius(j) += gk.dot(R_ * Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0));
        g_h += gk.dot(R_ * Eigen::Vector3d(0.0, 0.0, frac) + dteff_dh);
      }
    }
    g_h += g_surface[mesh.bottom_index()].dot(dteff_dh);
    g_h += g_surface[mesh.top_index()].dot(R_ * Eigen::Vector3d::UnitZ() + dteff_dh);

    // Frusta volume.
    const double sgn_vol = (dvol > 0.0) - (dvol < 0.0);
    const double dz = shape.h / (n_z_ - 1);
    for (int j = 0; j < n_z_; ++j) {
      double dv = 0.0;
      const double rj = shape.Radius(j);
      if (j > 0) dv += 2.0 * rj + shape.Radius(j - 1);
      if (j + 1 < n_z_) dv += 2.0 * rj + shape.Radius(j + 1);
      g_radius(j) += w_.shape_vol * sgn_vol * std::numbers::pi / 3.0 * dz * dv;
    }
    g_h += w_.shape_vol * sgn_vol * vol / shape.h;

    grad->setZero(x.size());
    for (int j = 0; j < n_z_; ++j) {
      const double frac = static_cast<double>(j) / (n_z_ - 1);
      (*grad)(0) += (1.0 - frac) * g_radius(j);
      (*grad)(1) += frac * g_radius(j);
      (*grad)(3 + j) = g_radius(j);
    }
    (*grad)(2) = g_h;
    auto sgn = [](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); };
    (*grad)(0) += -w_.shape_taper * sgn(dr) + w_.shape_r1 * sgn(shape.r1 - r1_anchor_);
    (*grad)(1) += w_.shape_taper * sgn(dr) + w_.shape_r2 * sgn(shape.r2 - r2_anchor_);
    return loss;
  }

 private:
  Eigen::Matrix3d R_;
  Eigen::Vector3d t_;
  int n_theta_;
  int n_z_;
  std::span<const Eigen::Vector3d> target_rings_;
  std::span<const Eigen::Vector3d> target_full_;
  FitWeights w_;
  double target_volume_;
  double r1_anchor_;
  double r2_anchor_;
};

struct PoseFit {
  FarmPose pose;  // swing-only rotation
  double loss = 0.0;
  int iterations = 0;
  bool early_stopped = false;
};

struct ShapeFit {
  FarmShape shape;
  double loss = 0.0;
  int iterations = 0;
  bool early_stopped = false;
};

inline PoseFit fit_pose(std::span<const Eigen::Vector3d> target_rings,
                        std::span<const Eigen::Vector3d> target_full, const FarmShape& shape,
                        const FarmPose& init, const FitConfig& cfg = {}) {
  const PoseObjective objective(shape, cfg.n_theta, target_rings, target_full, cfg.weights);
  Eigen::VectorXd x0(9);
  x0 << MatrixToRot6d(init.rotation), init.t;
  const ParamGroup groups[] = {{0, 9, cfg.pose_lr}};
  const auto res = minimize(objective, x0, groups, cfg.optim);
  PoseFit out;
  out.pose.rotation = swing_twist(rot6d_to_matrix(res.params.head<6>())).swing;
  out.pose.t = res.params.segment<3>(6);
  out.loss = res.loss;
  out.iterations = res.iterations;
  out.early_stopped = res.early_stopped;
  return out;
}

inline ShapeFit fit_shape(std::span<const Eigen::Vector3d> target_rings,
                          std::span<const Eigen::Vector3d> target_full, const FarmPose& pose,
                          const FarmShape& init, double target_volume, double r1_anchor,
                          double r2_anchor, const FitConfig& cfg = {}) {
  if (!(target_volume >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target volume must be >= 0");
  }
  const int n_z = init.n_z();
  const ShapeObjective objective(pose, cfg.n_theta, n_z, target_rings, target_full, cfg.weights,
                                 target_volume, r1_anchor, r2_anchor);
  const ParamGroup groups[] = {{0, 3, cfg.shape_lr_base}, {3, n_z, cfg.shape_lr_rho}};
  auto clamp = [&](Eigen::VectorXd& x) {
    x(2) = std::max(x(2), 1.0);
    for (int j = 0; j < n_z; ++j) {
      const double frac = static_cast<double>(j) / (n_z - 1);
      const double r = x(0) + (x(1) - x(0)) * frac + x(3 + j);
      if (r < cfg.min_radius) x(3 + j) += cfg.min_radius - r;
    }
  };
  Eigen::VectorXd x0 = init.ToVector();
  clamp(x0);
  const auto res = minimize(objective, x0, groups, cfg.optim, clamp);
  ShapeFit out;
  out.shape = FarmShape::FromVector(res.params);
  out.loss = res.loss;
  out.iterations = res.iterations;
  out.early_stopped = res.early_stopped;
  return out;
}

inline ShapeFit fit_shape(std::span<const Eigen::Vector3d> target_rings,
                          std::span<const Eigen::Vector3d> target_full, const FarmPose& pose,
                          const FarmShape& init, double target_volume, const FitConfig& cfg = {}) {
  return fit_shape(target_rings, target_full, pose, init, target_volume, init.r1, init.r2, cfg);
}

struct FitResult {
  FarmShape shape;
  FarmPose pose;
  FarmJoints joints;
  double pose_loss = 0.0;
  double shape_loss = 0.0;
  int pose_iterations = 0;
  int shape_iterations = 0;
  bool converged = false;  // both stages ended by early stopping
};

inline FitResult fit_farm(std::span<const Eigen::Vector3d> target_full,
                          std::span<const Eigen::Vector3d> elbow_ring,
                          std::span<const Eigen::Vector3d> wrist_ring, const FitConfig& cfg = {}) {
  if (target_full.empty()) throw Error(ErrorCode::kEmptySet, "target cloud is empty");
  const RingInit init = init_from_rings(elbow_ring, wrist_ring);
  PointSet target_rings(elbow_ring.begin(), elbow_ring.end());
  target_rings.insert(target_rings.end(), wrist_ring.begin(), wrist_ring.end());

  FarmShape shape{init.r1, init.r2, init.h, std::vector<double>(cfg.n_z, 0.0)};
  const PoseFit pose = fit_pose(target_rings, target_full, shape, init.pose, cfg);
  const double volume = cfg.target_volume.value_or(volume_frusta(shape));
  const ShapeFit fitted = fit_shape(target_rings, target_full, pose.pose, shape, volume, init.r1,
                                    init.r2, cfg);

  FitResult out;
  out.shape = fitted.shape;
  out.pose = pose.pose;
  out.joints = apply_pose(build_mesh(out.shape, 3), out.pose.rotation, out.pose.t).joints;
  out.pose_loss = pose.loss;
  out.shape_loss = fitted.loss;
  out.pose_iterations = pose.iterations;
  out.shape_iterations = fitted.iterations;
  out.converged = pose.early_stopped && fitted.early_stopped;
  return out;
}

// PCA over shape vectors; W holds the top-d orthonormal principal directions.
inline PcaSpace train_pca(std::span<const Eigen::VectorXd> corpus, int d) {
  if (d < 1 || static_cast<int>(corpus.size()) <= d) {
    throw Error(ErrorCode::kInsufficientCorpus, "corpus must contain more than d vectors");
  }
  const Eigen::Index dim = corpus.front().size();
  if (d > dim) throw Error(ErrorCode::kInsufficientCorpus, "d exceeds the vector length");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& s : corpus) {
    if (s.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "corpus vectors differ");
    mean += s;
  }
  mean /= static_cast<double>(corpus.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : corpus) cov += (s - mean) * (s - mean).transpose();
  cov /= static_cast<double>(corpus.size() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  PcaSpace pca;
  pca.b = mean;
  pca.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
  pca.W = eig.eigenvectors().rowwise().reverse().leftCols(d);
  const double total = pca.eigenvalues.sum();
  pca.explained = total > 0.0 ? pca.eigenvalues.head(d).sum() / total : 1.0;
  return pca;
}

}  // namespace raylift
