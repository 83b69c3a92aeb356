#pragma once

// Crop intrinsics: viewing directions at the undistorted crop centre and
// corners plus six scale-normalized intrinsics (16 scalars), and their
// 128-dimensional sinusoidal encoding.

#include <Eigen/Core>

#include <array>
#include <cmath>

#include "raylift/camera.hpp"
#include "raylift/error.hpp"

namespace raylift {

struct CropIntrinsics {
  Eigen::Vector2d theta_c = Eigen::Vector2d::Zero();
  Eigen::Vector2d theta_11 = Eigen::Vector2d::Zero();
  Eigen::Vector2d theta_12 = Eigen::Vector2d::Zero();
  Eigen::Vector2d theta_21 = Eigen::Vector2d::Zero();
  Eigen::Vector2d theta_22 = Eigen::Vector2d::Zero();
  double p_x = 0.0;
  double p_y = 0.0;
  double log_rw = 0.0;
  double log_rh = 0.0;
  double alpha_x = 0.0;
  double alpha_y = 0.0;

  std::array<double, 16> ToArray() const {
    return {theta_c.x(),  theta_c.y(),  theta_11.x(), theta_11.y(), theta_12.x(), theta_12.y(),
            theta_21.x(), theta_21.y(), theta_22.x(), theta_22.y(), p_x,          p_y,
            log_rw,       log_rh,       alpha_x,      alpha_y};
  }
};

using CitVector = std::array<double, 128>;

inline Eigen::Vector2d viewing_direction(const CalibratedCamera& cam, double u, double v) {
  const Intrinsics& k = cam.intrinsics();
  return {std::atan((u - k.cx) / k.fx), std::atan((v - k.cy) / k.fy)};
}

inline CropIntrinsics crop_intrinsics(const CalibratedCamera& cam, const CropBox& box) {
  const Intrinsics& k = cam.intrinsics();
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) {
    throw Error(ErrorCode::kZeroAreaCrop, "crop box has zero area");
  }
  if (box.x1 <= 0.0 || box.y1 <= 0.0 || box.x0 >= k.width || box.y0 >= k.height) {
    throw Error(ErrorCode::kInvalidArgument, "crop box does not intersect the image");
  }
  const Eigen::Vector2d c =
      cam.UndistortPoint(0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1));
  const Eigen::Vector2d p11 = cam.UndistortPoint(box.x0, box.y0);
  const Eigen::Vector2d p12 = cam.UndistortPoint(box.x0, box.y1);
  const Eigen::Vector2d p21 = cam.UndistortPoint(box.x1, box.y0);
  const Eigen::Vector2d p22 = cam.UndistortPoint(box.x1, box.y1);
  const double w = p22.x() - p11.x();
  const double h = p22.y() - p11.y();
  if (!(w > 0.0) || !(h > 0.0)) {
    throw Error(ErrorCode::kZeroAreaCrop, "undistorted crop has zero area");
  }

  CropIntrinsics ci;
  ci.theta_c = viewing_direction(cam, c.x(), c.y());
  ci.theta_11 = viewing_direction(cam, p11.x(), p11.y());
  ci.theta_12 = viewing_direction(cam, p12.x(), p12.y());
  ci.theta_21 = viewing_direction(cam, p21.x(), p21.y());
  ci.theta_22 = viewing_direction(cam, p22.x(), p22.y());
  ci.p_x = (k.cx - c.x()) / w;
  ci.p_y = (k.cy - c.y()) / h;
  ci.log_rw = std::log(w / k.width);
  ci.log_rh = std::log(h / k.height);
  ci.alpha_x = std::atan(k.width / (2.0 * k.fx));
  ci.alpha_y = std::atan(k.height / (2.0 * k.fy));
  return ci;
}

// Per scalar x: [sin(x w_0), cos(x w_0), ..., sin(x w_3), cos(x w_3)] with
// w_k = 10000^(-k/4).
inline CitVector sinusoidal_encode(const CropIntrinsics& ci) {
  constexpr int kBands = 4;
  const auto values = ci.ToArray();
  CitVector out{};
  for (size_t i = 0; i < values.size(); ++i) {
    for (int k = 0; k < kBands; ++k) {
      const double omega = std::pow(10000.0, -static_cast<double>(k) / kBands);
      out[i * 2 * kBands + 2 * k] = std::sin(values[i] * omega);
      out[i * 2 * kBands + 2 * k + 1] = std::cos(values[i] * omega);
    }
  }
  return out;
}

}  // namespace raylift
