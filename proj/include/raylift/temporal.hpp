#pragma once

// Constant-velocity Kalman filter over per-frame 3D translations (mm), the
// fidelity/smoothness tuning objective and an exhaustive grid tuner.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "raylift/error.hpp"

namespace raylift {

// Defaults are the meter-scale values (q_pos 1e-3 m^2, q_vel 1e-5 (m/s)^2,
// r_meas 1e-3 m^2) converted to millimeters.
struct KalmanConfig {
  double freq = 30.0;
  double q_pos = 1000.0;
  double q_vel = 10.0;
  double r_meas = 1000.0;

  void Validate() const {
    if (!(freq > 0.0 && q_pos > 0.0 && q_vel > 0.0 && r_meas > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "Kalman frequency and noise variances must be positive");
    }
  }
};

struct KalmanState {
  Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();  // pos, vel
  Eigen::Matrix<double, 6, 6> P = Eigen::Matrix<double, 6, 6>::Identity();

  Eigen::Vector3d position() const { return x.head<3>(); }
  Eigen::Vector3d velocity() const { return x.tail<3>(); }
};

namespace detail {

using Mat6 = Eigen::Matrix<double, 6, 6>;

inline Mat6 Transition(const KalmanConfig& cfg) {
  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>() = Eigen::Matrix3d::Identity() / cfg.freq;
  return F;
}

inline Mat6 ProcessNoise(const KalmanConfig& cfg) {
  Mat6 Q = Mat6::Zero();
  Q.topLeftCorner<3, 3>() = cfg.q_pos * Eigen::Matrix3d::Identity();
  Q.bottomRightCorner<3, 3>() = cfg.q_vel * Eigen::Matrix3d::Identity();
  return Q;
}

}  // namespace detail

inline KalmanState kf_init(const Eigen::Vector3d& z0, const KalmanConfig& cfg) {
  cfg.Validate();
  KalmanState s;
  s.x.head<3>() = z0;
  s.P.setZero();
  s.P.topLeftCorner<3, 3>() = cfg.r_meas * Eigen::Matrix3d::Identity();
  s.P.bottomRightCorner<3, 3>() = 1e3 * cfg.q_vel * Eigen::Matrix3d::Identity();
  return s;
}

inline KalmanState kf_predict(const KalmanState& state, const KalmanConfig& cfg) {
  const detail::Mat6 F = detail::Transition(cfg);
  KalmanState s;
  s.x = F * state.x;
  s.P = F * state.P * F.transpose() + detail::ProcessNoise(cfg);
  s.P = 0.5 * (s.P + s.P.transpose()).eval();
  return s;
}

struct KalmanStepResult {
  KalmanState state;
  Eigen::Vector3d position;
};

inline KalmanStepResult kf_step(const KalmanState& state, const Eigen::Vector3d& z,
                                const KalmanConfig& cfg) {
  KalmanState s = kf_predict(state, cfg);
  // H = [I 0], so S and K only involve the position blocks of P.
  const Eigen::Matrix3d S =
      s.P.topLeftCorner<3, 3>() + cfg.r_meas * Eigen::Matrix3d::Identity();
  const Eigen::Matrix<double, 6, 3> PHt = s.P.leftCols<3>();
  const Eigen::Matrix<double, 6, 3> K = S.ldlt().solve(PHt.transpose()).transpose();
  const Eigen::Vector3d innovation = z - s.x.head<3>();
  s.x += K * innovation;
  // Joseph form keeps P symmetric PSD.
  detail::Mat6 IKH = detail::Mat6::Identity();
  IKH.leftCols<3>() -= K;
  s.P = IKH * s.P * IKH.transpose() + cfg.r_meas * K * K.transpose();
  s.P = 0.5 * (s.P + s.P.transpose()).eval();
  return {s, s.x.head<3>()};
}

// Frames without a measurement (nullopt) get a predict-only step.
inline std::vector<Eigen::Vector3d> filter_trajectory(
    std::span<const std::optional<Eigen::Vector3d>> traj, const KalmanConfig& cfg = {}) {
  cfg.Validate();
  if (traj.empty()) throw Error(ErrorCode::kEmptyTrajectory, "trajectory is empty");
  std::vector<Eigen::Vector3d> out;
  out.reserve(traj.size());
  std::optional<KalmanState> state;
  for (const auto& z : traj) {
    if (!state) {
      if (!z) {
        out.push_back(Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN()));
        continue;
      }
      state = kf_init(*z, cfg);
      out.push_back(*z);
      continue;
    }
    if (z) {
      auto step = kf_step(*state, *z, cfg);
      state = step.state;
      out.push_back(step.position);
    } else {
      state = kf_predict(*state, cfg);
      out.push_back(state->position());
    }
  }
  return out;
}

inline std::vector<Eigen::Vector3d> filter_trajectory(std::span<const Eigen::Vector3d> traj,
                                                      const KalmanConfig& cfg = {}) {
  std::vector<std::optional<Eigen::Vector3d>> opt(traj.begin(), traj.end());
  return filter_trajectory(std::span<const std::optional<Eigen::Vector3d>>(opt), cfg);
}

// lambda * sum ||p - p_gt||^2 + (1 - lambda) * sum ||p_{t+1} - 2 p_t + p_{t-1}||^2
inline double tune_objective(std::span<const Eigen::Vector3d> filtered,
                             std::span<const Eigen::Vector3d> gt, double lambda) {
  if (filtered.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "filtered and ground-truth lengths differ");
  }
  if (filtered.size() < 3) throw Error(ErrorCode::kTooShort, "need at least 3 frames");
  double fid = 0.0;
  for (size_t t = 0; t < gt.size(); ++t) fid += (filtered[t] - gt[t]).squaredNorm();
  double smooth = 0.0;
  for (size_t t = 1; t + 1 < filtered.size(); ++t) {
    smooth += (filtered[t + 1] - 2.0 * filtered[t] + filtered[t - 1]).squaredNorm();
  }
  return lambda * fid + (1.0 - lambda) * smooth;
}

struct TuneConfig {
  double lambda = 0.7;
  std::vector<double> q_pos;
  std::vector<double> q_vel;
  std::vector<double> r_meas;
};

// Exhaustive search; ties go to the lexicographically smallest
// (q_pos, q_vel, r_meas).
inline KalmanConfig grid_tune(std::span<const Eigen::Vector3d> noisy,
                              std::span<const Eigen::Vector3d> gt, const TuneConfig& tc,
                              double freq = 30.0) {
  if (tc.q_pos.empty() || tc.q_vel.empty() || tc.r_meas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "tuning grids must be non-empty");
  }
  if (!(tc.lambda >= 0.0 && tc.lambda <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  }
  auto sorted = [](std::vector<double> g) {
    std::sort(g.begin(), g.end());
    return g;
  };
  const auto qp = sorted(tc.q_pos), qv = sorted(tc.q_vel), rm = sorted(tc.r_meas);

  KalmanConfig best;
  double best_loss = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double a : qp) {
    for (double b : qv) {
      for (double c : rm) {
        const KalmanConfig cfg{freq, a, b, c};
        const auto filtered = filter_trajectory(noisy, cfg);
        const double loss = tune_objective(filtered, gt, tc.lambda);
        if (!found || loss < best_loss) {
          best = cfg;
          best_loss = loss;
          found = true;
        }
      }
    }
  }
  return best;
}

}  // namespace raylift
