#pragma once

// Parametric forearm: a truncated-cone lattice mesh with a learned radial
// offset profile, three axis joints (elbow, mid-forearm, wrist), a linear
// PCA shape space and a swing-only pose.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "raylift/error.hpp"
#include "raylift/rotation.hpp"

namespace raylift {

inline constexpr int kDefaultNTheta = 50;
inline constexpr int kDefaultNz = 12;

struct FarmShape {
  double r1 = 42.0;   // elbow radius, mm
  double r2 = 27.0;   // wrist radius, mm
  double h = 250.0;   // length, mm
  std::vector<double> rho = std::vector<double>(kDefaultNz, 0.0);

  int n_z() const { return static_cast<int>(rho.size()); }

  double Radius(int j) const {
    return r1 + (r2 - r1) * static_cast<double>(j) / (n_z() - 1) + rho[j];
  }

  // s = [r1 r2 h rho_0 ... rho_{n_z-1}]
  Eigen::VectorXd ToVector() const {
    Eigen::VectorXd s(3 + rho.size());
    s << r1, r2, h, Eigen::Map<const Eigen::VectorXd>(rho.data(), rho.size());
    return s;
  }

  static FarmShape FromVector(const Eigen::VectorXd& s) {
    if (s.size() < 5) throw Error(ErrorCode::kDimensionMismatch, "shape vector too short");
    FarmShape out;
    out.r1 = s(0);
    out.r2 = s(1);
    out.h = s(2);
    out.rho.assign(s.data() + 3, s.data() + s.size());
    return out;
  }

  static FarmShape Cylinder(double r, double h, int n_z = kDefaultNz) {
    return {r, r, h, std::vector<double>(n_z, 0.0)};
  }
};

struct FarmJoints {
  Eigen::Vector3d elbow = Eigen::Vector3d::Zero();
  Eigen::Vector3d mid = Eigen::Vector3d::Zero();
  Eigen::Vector3d wrist = Eigen::Vector3d::Zero();
};

struct FarmMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  FarmJoints joints;
  int n_theta = 0;
  int n_z = 0;

  int RingIndex(int i, int j) const { return j * n_theta + i; }
  int bottom_index() const { return n_theta * n_z; }
  int top_index() const { return n_theta * n_z + 1; }
  int mid_index() const { return n_theta * n_z + 2; }

  // Level-0 (elbow) and level-(n_z-1) (wrist) vertex rings.
  std::vector<Eigen::Vector3d> Ring(int level) const {
    std::vector<Eigen::Vector3d> out;
    out.reserve(n_theta);
    for (int i = 0; i < n_theta; ++i) out.push_back(vertices[RingIndex(i, level)]);
    return out;
  }

  std::vector<Eigen::Vector3d> BoundaryRings() const {
    auto rings = Ring(0);
    auto top = Ring(n_z - 1);
    rings.insert(rings.end(), top.begin(), top.end());
    return rings;
  }

  // Every vertex referenced by a face (the mid joint vertex is interior).
  std::vector<Eigen::Vector3d> SurfacePoints() const {
    return {vertices.begin(), vertices.begin() + n_theta * n_z + 2};
  }
};

inline FarmMesh build_mesh(const FarmShape& shape, int n_theta = kDefaultNTheta) {
  const int n_z = shape.n_z();
  if (n_theta < 3 || n_z < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need n_theta >= 3 and n_z >= 2");
  }
  if (!(shape.h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "length must be positive");
  FarmMesh mesh;
  mesh.n_theta = n_theta;
  mesh.n_z = n_z;
  mesh.vertices.reserve(n_theta * n_z + 3);
  for (int j = 0; j < n_z; ++j) {
    const double r = shape.Radius(j);
    if (!(r > 0.0)) {
      throw Error(ErrorCode::kNonPositiveRadius, "radius at level " + std::to_string(j) +
                                                     " is " + std::to_string(r));
    }
    const double z = static_cast<double>(j) / (n_z - 1) * shape.h;
    for (int i = 0; i < n_theta; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / n_theta;
      mesh.vertices.emplace_back(r * std::cos(theta), r * std::sin(theta), z);
    }
  }
  mesh.vertices.emplace_back(0.0, 0.0, 0.0);
  mesh.vertices.emplace_back(0.0, 0.0, shape.h);
  mesh.vertices.emplace_back(0.0, 0.0, 0.5 * shape.h);

  mesh.faces.reserve(2 * n_theta * (n_z - 1) + 2 * n_theta);
  for (int j = 0; j + 1 < n_z; ++j) {
    for (int i = 0; i < n_theta; ++i) {
      const int i1 = (i + 1) % n_theta;
      const int a = mesh.RingIndex(i, j), b = mesh.RingIndex(i1, j);
      const int c = mesh.RingIndex(i1, j + 1), d = mesh.RingIndex(i, j + 1);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  }
  for (int i = 0; i < n_theta; ++i) {
    const int i1 = (i + 1) % n_theta;
    mesh.faces.push_back({mesh.bottom_index(), mesh.RingIndex(i1, 0), mesh.RingIndex(i, 0)});
    mesh.faces.push_back(
        {mesh.top_index(), mesh.RingIndex(i, n_z - 1), mesh.RingIndex(i1, n_z - 1)});
  }
  mesh.joints.elbow = Eigen::Vector3d::Zero();
  mesh.joints.mid = Eigen::Vector3d(0.0, 0.0, 0.5 * shape.h);
  mesh.joints.wrist = Eigen::Vector3d(0.0, 0.0, shape.h);
  return mesh;
}

struct MeshCheck {
  bool edge_manifold = false;  // every edge shared by exactly two faces
  bool oriented = false;       // every directed edge used once
  long euler = 0;              // over face-referenced vertices
  double signed_volume = 0.0;

  bool watertight() const { return edge_manifold && oriented && euler == 2; }
};

inline double SignedVolume(std::span<const Eigen::Vector3d> vertices,
                           std::span<const std::array<int, 3>> faces) {
  double vol = 0.0;
  for (const auto& f : faces) {
    vol += vertices[f[0]].dot(vertices[f[1]].cross(vertices[f[2]]));
  }
  return vol / 6.0;
}

inline MeshCheck check_mesh(std::span<const Eigen::Vector3d> vertices,
                            std::span<const std::array<int, 3>> faces) {
  MeshCheck out;
  std::map<std::pair<int, int>, int> directed;
  std::map<std::pair<int, int>, int> undirected;
  std::vector<char> referenced(vertices.size(), 0);
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      referenced[a] = 1;
      ++directed[{a, b}];
      ++undirected[{std::min(a, b), std::max(a, b)}];
    }
  }
  out.edge_manifold = true;
  for (const auto& [edge, count] : undirected) {
    if (count != 2) out.edge_manifold = false;
  }
  out.oriented = true;
  for (const auto& [edge, count] : directed) {
    if (count != 1) out.oriented = false;
  }
  long n_vertices = 0;
  for (char r : referenced) n_vertices += r;
  out.euler = n_vertices - static_cast<long>(undirected.size()) + static_cast<long>(faces.size());
  out.signed_volume = SignedVolume(vertices, faces);
  return out;
}

inline MeshCheck check_mesh(const FarmMesh& mesh) {
  return check_mesh(mesh.vertices, mesh.faces);
}

// Divergence-theorem volume of a closed, consistently oriented mesh.
inline double mesh_volume(std::span<const Eigen::Vector3d> vertices,
                          std::span<const std::array<int, 3>> faces) {
  const MeshCheck check = check_mesh(vertices, faces);
  if (!check.watertight()) throw Error(ErrorCode::kNotWatertight, "mesh is not closed");
  return check.signed_volume;
}

inline double mesh_volume(const FarmMesh& mesh) { return mesh_volume(mesh.vertices, mesh.faces); }

// Sum of conical frusta between consecutive levels.
inline double volume_frusta(const FarmShape& shape) {
  const int n_z = shape.n_z();
  const double dz = shape.h / (n_z - 1);
  double sum = 0.0;
  for (int j = 0; j + 1 < n_z; ++j) {
    const double a = shape.Radius(j), b = shape.Radius(j + 1);
    sum += a * a + a * b + b * b;
  }
  return std::numbers::pi / 3.0 * dz * sum;
}

struct PcaSpace {
  Eigen::MatrixXd W;        // (3 + n_z) x d, orthonormal columns
  Eigen::VectorXd b;        // mean shape vector
  Eigen::VectorXd eigenvalues;  // full spectrum, descending
  double explained = 1.0;

  int n_z() const { return static_cast<int>(b.size()) - 3; }
  int dim() const { return static_cast<int>(W.cols()); }
};

inline FarmShape decode_shape(const PcaSpace& pca, const Eigen::VectorXd& p) {
  if (p.size() != pca.W.cols() || pca.W.rows() != pca.b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "latent size does not match the PCA space");
  }
  return FarmShape::FromVector(pca.W * p + pca.b);
}

inline Eigen::VectorXd encode_shape(const PcaSpace& pca, const FarmShape& shape) {
  const Eigen::VectorXd s = shape.ToVector();
  if (s.size() != pca.b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "shape length does not match the PCA space");
  }
  return pca.W.transpose() * (s - pca.b);
}

// Rotates about the mesh's mid joint by the swing part of R, then translates.
inline FarmMesh apply_pose(const FarmMesh& mesh, const Eigen::Matrix3d& R,
                           const Eigen::Vector3d& t) {
  const Eigen::Matrix3d swing = swing_twist(R).swing;
  const Eigen::Vector3d c = mesh.joints.mid;
  FarmMesh out = mesh;
  for (auto& v : out.vertices) v = swing * (v - c) + c + t;
  out.joints.elbow = swing * (mesh.joints.elbow - c) + c + t;
  out.joints.mid = c + t;
  out.joints.wrist = swing * (mesh.joints.wrist - c) + c + t;
  return out;
}

struct FarmParams {
  Eigen::VectorXd latent;                              // gamma
  Vector6d rot6d = (Vector6d() << 1, 0, 0, 0, 1, 0).finished();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

inline FarmMesh farm_operator(const FarmParams& params, const PcaSpace& pca,
                              int n_theta = kDefaultNTheta) {
  const FarmShape shape = decode_shape(pca, params.latent);
  return apply_pose(build_mesh(shape, n_theta), rot6d_to_matrix(params.rot6d), params.t);
}

struct UnifiedLimb {
  std::vector<Eigen::Vector3d> joints;  // 21 hand joints, then elbow, mid, wrist
  FarmMesh forearm;
};

// Places the forearm's wrist on the hand wrist (index 0), then backs it off
// toward the elbow by 3% of the forearm length. Rotation is untouched.
inline UnifiedLimb attach_forearm(std::span<const Eigen::Vector3d> hand_joints,
                                  const FarmMesh& farm) {
  constexpr double kElbowOffset = 0.03;
  if (hand_joints.size() != 21) {
    throw Error(ErrorCode::kDimensionMismatch, "expected 21 hand joints");
  }
  const Eigen::Vector3d arm = farm.joints.elbow - farm.joints.wrist;
  const double length = arm.norm();
  if (!(length > 1e-12)) throw Error(ErrorCode::kDegenerateArm, "elbow coincides with wrist");
  const Eigen::Vector3d shift =
      hand_joints[0] - farm.joints.wrist + kElbowOffset * length * (arm / length);

  UnifiedLimb out;
  out.forearm = farm;
  for (auto& v : out.forearm.vertices) v += shift;
  out.forearm.joints.elbow += shift;
  out.forearm.joints.mid += shift;
  out.forearm.joints.wrist += shift;
  out.joints.assign(hand_joints.begin(), hand_joints.end());
  out.joints.push_back(out.forearm.joints.elbow);
  out.joints.push_back(out.forearm.joints.mid);
  out.joints.push_back(out.forearm.joints.wrist);
  return out;
}

}  // namespace raylift
