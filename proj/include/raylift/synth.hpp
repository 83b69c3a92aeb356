#pragma once

// Synthetic hand-forearm scenes with exact ground truth. Skeletons are
// geometric templates (planar fingers, straight forearm), not anatomical
// data; they exist to exercise the solver, filter and metrics.
//
// Joint layout: 0 wrist, 1-4 thumb, 5-8 index, 9-12 middle, 13-16 ring,
// 17-20 pinky, then 21 elbow, 22 mid-forearm, 23 forearm wrist.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "raylift/camera.hpp"
#include "raylift/error.hpp"
#include "raylift/rotation.hpp"
#include "raylift/solver.hpp"

namespace raylift {

inline constexpr int kHandJoints = 21;
inline constexpr int kLimbJoints = 24;
inline constexpr int kWristIndex = 0;
inline constexpr int kMiddleMcpIndex = 9;

using Skeleton = std::vector<Eigen::Vector3d>;

// Wrist at the origin, fingers along +y, forearm along -y. The wrist to
// middle-MCP distance equals hand_scale exactly.
inline Skeleton gen_skeleton(double hand_scale, std::uint64_t seed) {
  if (!(hand_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "hand_scale must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> flex(0.0, 0.6);
  const double s = hand_scale;
  constexpr double kDeg = std::numbers::pi / 180.0;

  Skeleton sk(kLimbJoints, Eigen::Vector3d::Zero());
  struct Finger {
    double base_angle;  // from +y toward +x
    double base_len;
    std::array<double, 3> seg;
  };
  const Finger fingers[5] = {
      {-50.0 * kDeg, 0.30, {0.35, 0.30, 0.25}},  // thumb (CMC as base)
      {-12.0 * kDeg, 0.95, {0.45, 0.28, 0.22}},
      {0.0, 1.00, {0.50, 0.30, 0.24}},
      {12.0 * kDeg, 0.92, {0.46, 0.28, 0.22}},
      {25.0 * kDeg, 0.85, {0.36, 0.22, 0.20}},
  };
  for (int f = 0; f < 5; ++f) {
    const Finger& fg = fingers[f];
    const int base = 1 + 4 * f;
    Eigen::Vector3d dir(std::sin(fg.base_angle), std::cos(fg.base_angle), 0.0);
    Eigen::Vector3d p = fg.base_len * s * dir;
    sk[base] = p;
    // Flexion bends each segment about the finger's lateral axis.
    const Eigen::Vector3d lateral = dir.cross(Eigen::Vector3d::UnitZ()).normalized();
    double bend = 0.0;
    for (int k = 0; k < 3; ++k) {
      bend += flex(rng);
      const Eigen::Vector3d seg_dir = Eigen::AngleAxisd(bend, lateral) * dir;
      p += fg.seg[k] * s * seg_dir;
      sk[base + k + 1] = p;
    }
  }
  const double forearm = 2.8 * s;
  sk[21] = Eigen::Vector3d(0.0, -1.03 * forearm, 0.0);
  sk[22] = Eigen::Vector3d(0.0, -0.53 * forearm, 0.0);
  sk[23] = Eigen::Vector3d(0.0, -0.03 * forearm, 0.0);
  return sk;
}

struct MotionSpec {
  int control_points = 6;
  double depth_min = 350.0;  // mm along the ray through a control pixel
  double depth_max = 550.0;
  double margin = 0.3;       // control pixels avoid this fraction at each border
  double rotation_amplitude = 0.25;  // rad, per-frame wobble of the hand
};

struct NoiseSpec {
  double pixel_sigma = 0.0;
  // Confidence assigned to each keypoint; negative selects 1 / (1 + sigma).
  double confidence = -1.0;

  double Confidence() const { return confidence >= 0.0 ? confidence : 1.0 / (1.0 + pixel_sigma); }
};

struct SyntheticScene {
  CalibratedCamera camera;
  std::vector<Eigen::Vector3d> translations;        // wrist, camera space
  std::vector<Skeleton> rel_joints;                 // root-relative per frame
  std::vector<std::vector<Keypoint>> keypoints;     // observed
  NoiseSpec noise;
  std::uint64_t seed = 0;

  Skeleton CameraJoints(size_t frame) const {
    Skeleton out = rel_joints[frame];
    for (auto& j : out) j += translations[frame];
    return out;
  }
};

namespace detail {

inline Eigen::Vector3d CatmullRom(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                                  const Eigen::Vector3d& p2, const Eigen::Vector3d& p3,
                                  double t) {
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * (2.0 * p1 + (p2 - p0) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

inline bool InView(const CalibratedCamera& cam, const Eigen::Vector3d& p) {
  if (p.norm() < 1e-9 || p.z() <= 0.0) return false;
  if (AngleBetween(p, Eigen::Vector3d::UnitZ()) >= cam.theta_max()) return false;
  try {
    const Eigen::Vector2d px = cam.Project(p);
    if (!cam.InImage(px.x(), px.y())) return false;
    cam.UnprojectRay(px.x(), px.y());
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace detail

inline SyntheticScene gen_scene(const CalibratedCamera& cam, int n_frames,
                                const MotionSpec& motion = {}, const NoiseSpec& noise = {},
                                std::uint64_t seed = 0, double hand_scale = 90.0) {
  constexpr int kMaxAttempts = 200;
  if (n_frames < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one frame");
  if (motion.control_points < 4) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 4 spline control points");
  }
  if (!(noise.pixel_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");

  std::mt19937_64 rng(seed);
  const Intrinsics& k = cam.intrinsics();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Skeleton templ = gen_skeleton(hand_scale, rng());

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Eigen::Vector3d> ctrl;
    for (int c = 0; c < motion.control_points; ++c) {
      const double u = k.width * (motion.margin + (1.0 - 2.0 * motion.margin) * unit(rng));
      const double v = k.height * (motion.margin + (1.0 - 2.0 * motion.margin) * unit(rng));
      const double depth =
          motion.depth_min + (motion.depth_max - motion.depth_min) * unit(rng);
      Eigen::Vector3d ray;
      try {
        ray = cam.UnprojectRay(u, v);
      } catch (const Error&) {
        ray = Eigen::Vector3d::UnitZ();
      }
      ctrl.push_back(depth * ray);
    }

    // Forearm (template -y) points away from the camera with a random tilt;
    // the palm spins randomly about it.
    Eigen::Vector3d arm_dir(0.3 * gauss(rng), 0.3 + 0.2 * gauss(rng), 1.0);
    arm_dir.normalize();
    const Eigen::Matrix3d align =
        Eigen::Quaterniond::FromTwoVectors(-Eigen::Vector3d::UnitY(), arm_dir).toRotationMatrix();
    const Eigen::Matrix3d base =
        align * Eigen::AngleAxisd(2.0 * std::numbers::pi * unit(rng), Eigen::Vector3d::UnitY())
                    .toRotationMatrix();
    Eigen::Vector3d wobble_axis(gauss(rng), gauss(rng), gauss(rng));
    wobble_axis.normalize();
    const double wobble_phase = 2.0 * std::numbers::pi * unit(rng);
    const double wobble_cycles = 0.5 + unit(rng);

    SyntheticScene scene{cam, {}, {}, {}, noise, seed};
    bool ok = true;
    const int segments = motion.control_points - 3;
    for (int f = 0; f < n_frames && ok; ++f) {
      const double s = n_frames == 1 ? 0.0 : static_cast<double>(f) / (n_frames - 1) * segments;
      const int seg = std::min(static_cast<int>(s), segments - 1);
      const Eigen::Vector3d t =
          detail::CatmullRom(ctrl[seg], ctrl[seg + 1], ctrl[seg + 2], ctrl[seg + 3], s - seg);
      const double angle =
          motion.rotation_amplitude *
          std::sin(wobble_phase + 2.0 * std::numbers::pi * wobble_cycles * f / std::max(1, n_frames));
      const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, wobble_axis).toRotationMatrix() * base;
      Skeleton rel(templ.size());
      for (size_t j = 0; j < templ.size(); ++j) {
        rel[j] = R * templ[j];
        if (!detail::InView(cam, t + rel[j])) ok = false;
      }
      scene.translations.push_back(t);
      scene.rel_joints.push_back(std::move(rel));
    }
    if (!ok) continue;

    const double conf = noise.Confidence();
    for (int f = 0; f < n_frames; ++f) {
      std::vector<Keypoint> kps;
      kps.reserve(templ.size());
      for (const auto& j : scene.rel_joints[f]) {
        const Eigen::Vector2d px = cam.Project(scene.translations[f] + j);
        double du = 0.0, dv = 0.0;
        if (noise.pixel_sigma > 0.0) {
          du = noise.pixel_sigma * gauss(rng);
          dv = noise.pixel_sigma * gauss(rng);
        }
        kps.push_back({px.x() + du, px.y() + dv, conf});
      }
      scene.keypoints.push_back(std::move(kps));
    }
    return scene;
  }
  throw Error(ErrorCode::kFovExhausted, "could not keep the trajectory inside the FOV");
}

}  // namespace raylift
