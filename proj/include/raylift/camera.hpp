#pragma once

// Calibrated projection models: pixel <-> bearing-ray geometry, lens
// undistortion onto a same-focal pinhole image, crop coordinate mapping and
// a camera-geometry mismatch measure.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "raylift/error.hpp"

namespace raylift {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct Pinhole {};

struct EquidistantFisheye {};

// theta_d(theta) = theta + k1 theta^3 + k2 theta^5 + k3 theta^7 + k4 theta^9
struct KannalaBrandt {
  std::array<double, 4> k{0.0, 0.0, 0.0, 0.0};

  double Distort(double theta) const {
    const double t2 = theta * theta;
    return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))));
  }

  double Derivative(double theta) const {
    const double t2 = theta * theta;
    return 1.0 +
           t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])));
  }
};

using ProjectionModel = std::variant<Pinhole, EquidistantFisheye, KannalaBrandt>;

inline std::string ModelName(const ProjectionModel& model) {
  switch (model.index()) {
    case 0: return "pinhole";
    case 1: return "equidistant";
    default: return "kannala_brandt";
  }
}

// Top-left (x0, y0) and bottom-right (x1, y1) corners in the distorted image.
struct CropBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

namespace detail {

inline constexpr double kEquidistantSeriesRadius = 1e-6;
inline constexpr int kNewtonMaxIterations = 20;
inline constexpr double kNewtonTolerance = 1e-12;

// Builds the unit ray for an angle theta off the optical axis, in the
// azimuth of the normalized coordinates (nu, nv) whose radius is rho.
inline Eigen::Vector3d RayFromPolar(double nu, double nv, double rho, double theta) {
  double scale;  // sin(theta) / rho
  if (rho < kEquidistantSeriesRadius) {
    // theta == rho to first order for every fisheye model handled here.
    scale = 1.0 - theta * theta / 6.0;
  } else {
    scale = std::sin(theta) / rho;
  }
  Eigen::Vector3d d(nu * scale, nv * scale, std::cos(theta));
  return d.normalized();
}

}  // namespace detail

class CalibratedCamera {
 public:
  CalibratedCamera(const Intrinsics& intrinsics, ProjectionModel model)
      : k_(intrinsics), model_(std::move(model)) {
    if (!(k_.fx > 0.0) || !(k_.fy > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
    }
    if (!(k_.width > 0.0) || !(k_.height > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
    }
    if (!(k_.cx >= 0.0 && k_.cx < k_.width && k_.cy >= 0.0 && k_.cy < k_.height)) {
      throw Error(ErrorCode::kInvalidArgument, "principal point outside the image");
    }
    if (const auto* kb = std::get_if<KannalaBrandt>(&model_)) {
      theta_max_ = ValidateKannalaBrandt(*kb);
    } else if (std::holds_alternative<EquidistantFisheye>(model_)) {
      theta_max_ = std::numbers::pi;
    } else {
      theta_max_ = std::numbers::pi / 2.0;
    }
  }

  static CalibratedCamera MakePinhole(double fx, double fy, double cx, double cy,
                                      double width, double height) {
    return CalibratedCamera({fx, fy, cx, cy, width, height}, Pinhole{});
  }

  const Intrinsics& intrinsics() const { return k_; }
  const ProjectionModel& model() const { return model_; }
  bool is_pinhole() const { return std::holds_alternative<Pinhole>(model_); }
  // Largest off-axis angle the model covers (radians).
  double theta_max() const { return theta_max_; }

  bool InImage(double u, double v) const {
    return u >= 0.0 && u < k_.width && v >= 0.0 && v < k_.height;
  }

  Eigen::Vector2d NormalizePixel(double u, double v) const {
    return {(u - k_.cx) / k_.fx, (v - k_.cy) / k_.fy};
  }

  Eigen::Vector3d UnprojectRay(double u, double v) const {
    const Eigen::Vector2d n = NormalizePixel(u, v);
    const double rho = n.norm();
    return std::visit(
        [&](const auto& m) -> Eigen::Vector3d {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Pinhole>) {
            return Eigen::Vector3d(n.x(), n.y(), 1.0).normalized();
          } else if constexpr (std::is_same_v<M, EquidistantFisheye>) {
            if (rho > std::numbers::pi) {
              throw Error(ErrorCode::kNonConvergent,
                          "pixel lies outside the equidistant model domain");
            }
            return detail::RayFromPolar(n.x(), n.y(), rho, rho);
          } else {
            return detail::RayFromPolar(n.x(), n.y(), rho, InvertKannalaBrandt(m, rho));
          }
        },
        model_);
  }

  Eigen::Vector2d Project(const Eigen::Vector3d& p) const {
    if (is_pinhole()) {
      if (!(p.z() > 0.0)) {
        throw Error(ErrorCode::kBehindCamera, "point has non-positive depth");
      }
      return {k_.cx + k_.fx * p.x() / p.z(), k_.cy + k_.fy * p.y() / p.z()};
    }
    const double r_xy = std::hypot(p.x(), p.y());
    if (r_xy == 0.0 && p.z() == 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "cannot project the camera centre");
    }
    if (r_xy == 0.0) {
      if (p.z() < 0.0) {
        throw Error(ErrorCode::kBehindCamera, "point on the negative optical axis");
      }
      return {k_.cx, k_.cy};
    }
    const double theta = std::atan2(r_xy, p.z());
    double radius = theta;
    if (const auto* kb = std::get_if<KannalaBrandt>(&model_)) {
      radius = kb->Distort(theta);
    }
    return {k_.cx + k_.fx * radius * p.x() / r_xy, k_.cy + k_.fy * radius * p.y() / r_xy};
  }

  // phi_d: re-images the native ray through a pinhole with the same K.
  Eigen::Vector2d UndistortPoint(double u, double v) const {
    if (is_pinhole()) return {u, v};
    const Eigen::Vector3d d = UnprojectRay(u, v);
    if (!(d.z() > 0.0)) {
      throw Error(ErrorCode::kRayAtHorizon, "ray cannot be expressed in a pinhole image");
    }
    return {k_.cx + k_.fx * d.x() / d.z(), k_.cy + k_.fy * d.y() / d.z()};
  }

 private:
  double ValidateKannalaBrandt(const KannalaBrandt& kb) const {
    // The model must be invertible out to the farthest image corner.
    double rho_corner = 0.0;
    for (double u : {0.0, k_.width}) {
      for (double v : {0.0, k_.height}) {
        rho_corner = std::max(rho_corner, NormalizePixel(u, v).norm());
      }
    }
    constexpr int kSamples = 8192;
    const double step = std::numbers::pi / kSamples;
    for (int i = 0; i <= kSamples; ++i) {
      const double theta = i * step;
      if (!(kb.Derivative(theta) > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "Kannala-Brandt polynomial is not increasing over the image FOV");
      }
      if (kb.Distort(theta) >= rho_corner) return theta;
    }
    return std::numbers::pi;
  }

  double InvertKannalaBrandt(const KannalaBrandt& kb, double rho) const {
    if (rho > kb.Distort(theta_max_)) {
      throw Error(ErrorCode::kNonConvergent, "pixel beyond the declared field of view");
    }
    double theta = rho;
    for (int it = 0; it < detail::kNewtonMaxIterations; ++it) {
      const double delta = (kb.Distort(theta) - rho) / kb.Derivative(theta);
      theta -= delta;
      if (std::abs(delta) < detail::kNewtonTolerance) {
        if (!(theta >= 0.0 && theta <= theta_max_ + 1e-9)) break;
        return theta;
      }
    }
    throw Error(ErrorCode::kNonConvergent, "Kannala-Brandt inverse did not converge");
  }

  Intrinsics k_;
  ProjectionModel model_;
  double theta_max_ = std::numbers::pi / 2.0;
};

inline Eigen::Vector2d normalize_pixel(const CalibratedCamera& cam, double u, double v) {
  return cam.NormalizePixel(u, v);
}

inline Eigen::Vector3d unproject_ray(const CalibratedCamera& cam, double u, double v) {
  return cam.UnprojectRay(u, v);
}

inline Eigen::Vector2d project(const CalibratedCamera& cam, const Eigen::Vector3d& p) {
  return cam.Project(p);
}

inline Eigen::Vector2d undistort_point(const CalibratedCamera& cam, double u, double v) {
  return cam.UndistortPoint(u, v);
}

// Maps a pixel of an in_w x in_h network crop back to the full image.
inline Eigen::Vector2d crop_to_image(const CropBox& box, double cu, double cv,
                                     double in_w, double in_h) {
  if (!(in_w > 0.0) || !(in_h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "crop input size must be positive");
  }
  return {box.x0 + box.width() * cu / in_w, box.y0 + box.height() * cv / in_h};
}

// Robust angle between two directions.
inline double AngleBetween(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

struct CameraGeometryOptions {
  int grid = 32;
  std::vector<double> depths{200.0, 500.0, 1000.0};
};

// Mean chord displacement (mm) between rays of two camera models over a
// uniform interior pixel grid, averaged over the given depths.
inline double camera_geometry_error(const CalibratedCamera& ref, const CalibratedCamera& pert,
                                    std::span<const double> depths, int grid = 32) {
  const Intrinsics& a = ref.intrinsics();
  const Intrinsics& b = pert.intrinsics();
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kInvalidArgument, "cameras must share the image size");
  }
  if (grid < 2) throw Error(ErrorCode::kInvalidArgument, "grid must be at least 2");
  if (depths.empty()) throw Error(ErrorCode::kInvalidArgument, "no depths given");

  double depth_sum = 0.0;
  for (double z : depths) depth_sum += z;

  int skipped = 0;
  int used = 0;
  double sum = 0.0;
  for (int j = 0; j < grid; ++j) {
    const double v = (j + 0.5) * a.height / grid;
    for (int i = 0; i < grid; ++i) {
      const double u = (i + 0.5) * a.width / grid;
      Eigen::Vector3d ra, rb;
      try {
        ra = ref.UnprojectRay(u, v);
        rb = pert.UnprojectRay(u, v);
      } catch (const Error&) {
        ++skipped;
        continue;
      }
      // 2 z sin(alpha / 2) is linear in z, so the depth loop collapses.
      sum += 2.0 * std::sin(0.5 * AngleBetween(ra, rb)) * depth_sum;
      ++used;
    }
  }
  if (skipped * 10 >= grid * grid || used == 0) {
    throw Error(ErrorCode::kDegenerateComparison, "too many pixels failed to unproject");
  }
  return sum / (static_cast<double>(used) * static_cast<double>(depths.size()));
}

inline double camera_geometry_error(const CalibratedCamera& ref, const CalibratedCamera& pert,
                                    const CameraGeometryOptions& opts = {}) {
  return camera_geometry_error(ref, pert, opts.depths, opts.grid);
}

}  // namespace raylift
