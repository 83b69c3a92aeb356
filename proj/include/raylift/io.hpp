#pragma once

// File formats: camera calibration JSON, frame and joint JSONL streams,
// FARM shape / PCA / fit-result JSON, OBJ meshes and point clouds.
// Schema violations raise Error(kSchema) naming the offending record.

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "raylift/camera.hpp"
#include "raylift/error.hpp"
#include "raylift/farm.hpp"
#include "raylift/fit.hpp"
#include "raylift/metrics.hpp"
#include "raylift/solver.hpp"

namespace raylift::io {

using nlohmann::json;

inline std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSchema, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary and renames it into place.
inline void AtomicWrite(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::kInvalidArgument, "failed writing " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

inline json ParseJson(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, where + ": " + e.what());
  }
}

inline json LoadJson(const std::string& path) { return ParseJson(ReadFile(path), path); }

namespace detail {

inline double Number(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::kSchema, where + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

inline Eigen::Vector3d Vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kSchema, where + ": expected [x, y, z]");
  }
  Eigen::Vector3d v;
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) throw Error(ErrorCode::kSchema, where + ": non-numeric coordinate");
    v(k) = j[k].get<double>();
  }
  return v;
}

inline json Vec3Json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

// ---- camera ---------------------------------------------------------------

inline CalibratedCamera CameraFromJson(const json& j, const std::string& where = "camera") {
  if (!j.is_object() || !j.contains("model") || !j.at("model").is_string()) {
    throw Error(ErrorCode::kSchema, where + ": missing string field 'model'");
  }
  Intrinsics k;
  k.fx = detail::Number(j, "fx", where);
  k.fy = detail::Number(j, "fy", where);
  k.cx = detail::Number(j, "cx", where);
  k.cy = detail::Number(j, "cy", where);
  k.width = detail::Number(j, "width", where);
  k.height = detail::Number(j, "height", where);
  const std::string model = j.at("model").get<std::string>();
  try {
    if (model == "pinhole") return CalibratedCamera(k, Pinhole{});
    if (model == "equidistant") return CalibratedCamera(k, EquidistantFisheye{});
    if (model == "kannala_brandt") {
      KannalaBrandt kb;
      if (j.contains("coeffs")) {
        const json& c = j.at("coeffs");
        if (!c.is_array() || c.size() != 4) {
          throw Error(ErrorCode::kSchema, where + ": 'coeffs' must hold 4 numbers");
        }
        for (int i = 0; i < 4; ++i) {
          if (!c[i].is_number()) throw Error(ErrorCode::kSchema, where + ": non-numeric coeff");
          kb.k[i] = c[i].get<double>();
        }
      }
      return CalibratedCamera(k, kb);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema) throw;
    throw Error(ErrorCode::kSchema, where + ": " + e.what());
  }
  throw Error(ErrorCode::kSchema, where + ": unknown model '" + model + "'");
}

inline json CameraToJson(const CalibratedCamera& cam) {
  const Intrinsics& k = cam.intrinsics();
  json j = {{"model", ModelName(cam.model())}, {"fx", k.fx},       {"fy", k.fy},
            {"cx", k.cx},                      {"cy", k.cy},       {"width", k.width},
            {"height", k.height}};
  if (const auto* kb = std::get_if<KannalaBrandt>(&cam.model())) {
    j["coeffs"] = json::array({kb->k[0], kb->k[1], kb->k[2], kb->k[3]});
  }
  return j;
}

inline CalibratedCamera LoadCamera(const std::string& path) {
  return CameraFromJson(LoadJson(path), path);
}

// ---- JSONL streams ----------------------------------------------------------

inline std::vector<json> ReadJsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSchema, "cannot open " + path);
  std::vector<json> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(ParseJson(line, path + ":" + std::to_string(line_no)));
  }
  return out;
}

// One frame of detector output: per-joint keypoints plus root-relative joints.
struct FrameRecord {
  long frame_id = 0;
  std::vector<Keypoint> keypoints;  // invisible joints carry confidence 0
  std::vector<bool> visible;
  std::vector<Eigen::Vector3d> rel_joints;
};

inline FrameRecord FrameFromJson(const json& j) {
  if (!j.is_object() || !j.contains("frame_id") || !j.at("frame_id").is_number_integer()) {
    throw Error(ErrorCode::kSchema, "frame record without integer 'frame_id'");
  }
  FrameRecord r;
  r.frame_id = j.at("frame_id").get<long>();
  const std::string where = "frame_id " + std::to_string(r.frame_id);
  if (!j.contains("keypoints") || !j.at("keypoints").is_array() || !j.contains("rel_joints") ||
      !j.at("rel_joints").is_array()) {
    throw Error(ErrorCode::kSchema, where + ": needs 'keypoints' and 'rel_joints' arrays");
  }
  const json& kps = j.at("keypoints");
  const json& rel = j.at("rel_joints");
  if ((kps.size() != 21 && kps.size() != 24) || rel.size() != kps.size()) {
    throw Error(ErrorCode::kSchema, where + ": expected 21 or 24 aligned joints");
  }
  for (size_t i = 0; i < kps.size(); ++i) {
    const std::string jw = where + " joint " + std::to_string(i);
    Keypoint kp;
    kp.u = detail::Number(kps[i], "u", jw);
    kp.v = detail::Number(kps[i], "v", jw);
    kp.confidence = detail::Number(kps[i], "confidence", jw);
    if (!(kp.confidence >= 0.0 && kp.confidence <= 1.0)) {
      throw Error(ErrorCode::kSchema, jw + ": confidence outside [0, 1]");
    }
    bool vis = true;
    if (kps[i].contains("visible")) {
      if (!kps[i].at("visible").is_boolean()) {
        throw Error(ErrorCode::kSchema, jw + ": 'visible' must be boolean");
      }
      vis = kps[i].at("visible").get<bool>();
    }
    if (!vis) kp.confidence = 0.0;
    r.keypoints.push_back(kp);
    r.visible.push_back(vis);
    r.rel_joints.push_back(detail::Vec3(rel[i], jw));
  }
  return r;
}

inline json FrameToJson(const FrameRecord& r) {
  json kps = json::array();
  for (size_t i = 0; i < r.keypoints.size(); ++i) {
    const bool vis = r.visible.empty() || r.visible[i];
    kps.push_back({{"u", r.keypoints[i].u},
                   {"v", r.keypoints[i].v},
                   {"confidence", r.keypoints[i].confidence},
                   {"visible", vis}});
  }
  json rel = json::array();
  for (const auto& p : r.rel_joints) rel.push_back(detail::Vec3Json(p));
  return {{"frame_id", r.frame_id}, {"keypoints", kps}, {"rel_joints", rel}};
}

// Camera-space joints of one frame (ground truth or prediction).
struct JointRecord {
  long frame_id = 0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> joints;
  std::vector<bool> visible;  // empty: all visible
};

inline JointRecord JointRecordFromJson(const json& j) {
  if (!j.is_object() || !j.contains("frame_id") || !j.at("frame_id").is_number_integer()) {
    throw Error(ErrorCode::kSchema, "joint record without integer 'frame_id'");
  }
  JointRecord r;
  r.frame_id = j.at("frame_id").get<long>();
  const std::string where = "frame_id " + std::to_string(r.frame_id);
  if (!j.contains("translation") || !j.contains("joints") || !j.at("joints").is_array()) {
    throw Error(ErrorCode::kSchema, where + ": needs 'translation' and 'joints'");
  }
  r.translation = detail::Vec3(j.at("translation"), where);
  for (const auto& p : j.at("joints")) r.joints.push_back(detail::Vec3(p, where));
  if (j.contains("visible")) {
    const json& v = j.at("visible");
    if (!v.is_array() || v.size() != r.joints.size()) {
      throw Error(ErrorCode::kSchema, where + ": 'visible' must match 'joints'");
    }
    for (const auto& b : v) {
      if (!b.is_boolean()) throw Error(ErrorCode::kSchema, where + ": non-boolean visibility");
      r.visible.push_back(b.get<bool>());
    }
  }
  return r;
}

inline json JointRecordToJson(const JointRecord& r) {
  json joints = json::array();
  for (const auto& p : r.joints) joints.push_back(detail::Vec3Json(p));
  json j = {{"frame_id", r.frame_id},
            {"translation", detail::Vec3Json(r.translation)},
            {"joints", joints}};
  if (!r.visible.empty()) j["visible"] = r.visible;
  return j;
}

// ---- FARM ---------------------------------------------------------------

inline json ShapeToJson(const FarmShape& s) {
  return {{"r1", s.r1}, {"r2", s.r2}, {"h", s.h}, {"rho", s.rho}, {"n_z", s.n_z()}};
}

inline FarmShape ShapeFromJson(const json& j, const std::string& where = "shape") {
  FarmShape s;
  s.r1 = detail::Number(j, "r1", where);
  s.r2 = detail::Number(j, "r2", where);
  s.h = detail::Number(j, "h", where);
  const int n_z = static_cast<int>(detail::Number(j, "n_z", where));
  if (n_z < 2) throw Error(ErrorCode::kSchema, where + ": n_z must be >= 2");
  s.rho.assign(n_z, 0.0);
  if (j.contains("rho")) {
    const json& rho = j.at("rho");
    if (!rho.is_array() || static_cast<int>(rho.size()) != n_z) {
      throw Error(ErrorCode::kSchema, where + ": 'rho' must have n_z entries");
    }
    for (int i = 0; i < n_z; ++i) {
      if (!rho[i].is_number()) throw Error(ErrorCode::kSchema, where + ": non-numeric rho");
      s.rho[i] = rho[i].get<double>();
    }
  }
  return s;
}

inline json PcaToJson(const PcaSpace& p) {
  json W = json::array();
  for (Eigen::Index r = 0; r < p.W.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.W.cols(); ++c) row.push_back(p.W(r, c));
    W.push_back(row);
  }
  std::vector<double> b(p.b.data(), p.b.data() + p.b.size());
  std::vector<double> ev(p.eigenvalues.data(), p.eigenvalues.data() + p.eigenvalues.size());
  return {{"n_z", p.n_z()}, {"d", p.dim()}, {"W", W}, {"b", b}, {"explained", p.explained},
          {"eigenvalues", ev}};
}

inline PcaSpace PcaFromJson(const json& j, const std::string& where = "pca") try {
  const int n_z = static_cast<int>(detail::Number(j, "n_z", where));
  const int d = static_cast<int>(detail::Number(j, "d", where));
  if (!j.contains("W") || !j.contains("b") || !j.at("W").is_array() || !j.at("b").is_array() ||
      static_cast<int>(j.at("W").size()) != 3 + n_z ||
      static_cast<int>(j.at("b").size()) != 3 + n_z) {
    throw Error(ErrorCode::kSchema, where + ": W and b must have 3 + n_z rows");
  }
  PcaSpace p;
  p.W.resize(3 + n_z, d);
  p.b.resize(3 + n_z);
  for (int r = 0; r < 3 + n_z; ++r) {
    const json& row = j.at("W")[r];
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw Error(ErrorCode::kSchema, where + ": W rows must have d entries");
    }
    for (int c = 0; c < d; ++c) p.W(r, c) = row[c].get<double>();
    p.b(r) = j.at("b")[r].get<double>();
  }
  p.explained = j.value("explained", 1.0);
  if (j.contains("eigenvalues")) {
    const auto ev = j.at("eigenvalues").get<std::vector<double>>();
    p.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data(), ev.size());
  }
  return p;
} catch (const json::exception& e) {
  throw Error(ErrorCode::kSchema, where + ": " + e.what());
}

inline json FitResultToJson(const FitResult& r) {
  json R = json::array();
  for (int i = 0; i < 3; ++i) {
    R.push_back(json::array({r.pose.rotation(i, 0), r.pose.rotation(i, 1), r.pose.rotation(i, 2)}));
  }
  return {{"shape", ShapeToJson(r.shape)},
          {"pose", {{"rotation", R}, {"t", detail::Vec3Json(r.pose.t)}}},
          {"joints",
           {{"elbow", detail::Vec3Json(r.joints.elbow)},
            {"mid", detail::Vec3Json(r.joints.mid)},
            {"wrist", detail::Vec3Json(r.joints.wrist)}}},
          {"pose_stage", {{"loss", r.pose_loss}, {"iterations", r.pose_iterations}}},
          {"shape_stage", {{"loss", r.shape_loss}, {"iterations", r.shape_iterations}}},
          {"converged", r.converged}};
}

inline json MetricReportToJson(const MetricReport& m) {
  return {{"cs_mje_mm", m.cs_mje},     {"rs_mje_mm", m.rs_mje},
          {"ps_mje_mm", m.ps_mje},     {"cs_acc_m_s2", m.cs_acc},
          {"rs_acc_m_s2", m.rs_acc},   {"hand_scale_error_mm", m.hand_scale_error},
          {"frames", m.frames},        {"joints", m.joints}};
}

// ---- geometry files -------------------------------------------------------

inline std::string MeshToObj(const FarmMesh& mesh) {
  std::string out = "# units: mm\n";
  for (const auto& v : mesh.vertices) {
    out += "v " + FormatDouble(v.x()) + " " + FormatDouble(v.y()) + " " + FormatDouble(v.z()) + "\n";
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
           std::to_string(f[2] + 1) + "\n";
  }
  return out;
}

struct ObjData {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
};

inline ObjData ParseObj(const std::string& text, const std::string& where = "obj") {
  ObjData out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    const std::string loc = where + ":" + std::to_string(line_no);
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw Error(ErrorCode::kSchema, loc + ": bad vertex");
      out.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ls >> tok)) throw Error(ErrorCode::kSchema, loc + ": face needs 3 indices");
        const std::string idx = tok.substr(0, tok.find('/'));
        if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) {
          throw Error(ErrorCode::kSchema, loc + ": bad face index");
        }
        f[k] = std::stoi(idx) - 1;
        if (f[k] < 0) throw Error(ErrorCode::kSchema, loc + ": bad face index");
      }
      out.faces.push_back(f);
    }
  }
  for (const auto& f : out.faces) {
    for (int idx : f) {
      if (idx >= static_cast<int>(out.vertices.size())) {
        throw Error(ErrorCode::kSchema, where + ": face index out of range");
      }
    }
  }
  return out;
}

inline std::vector<Eigen::Vector3d> PointsFromJson(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::kSchema, where + ": expected an array of points");
  std::vector<Eigen::Vector3d> out;
  for (const auto& p : j) out.push_back(detail::Vec3(p, where));
  return out;
}

inline json PointsToJson(std::span<const Eigen::Vector3d> pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(detail::Vec3Json(p));
  return out;
}

// OBJ (vertices only are used) or a JSON array of [x, y, z].
inline std::vector<Eigen::Vector3d> LoadPointCloud(const std::string& path) {
  const std::string text = ReadFile(path);
  if (std::filesystem::path(path).extension() == ".obj") return ParseObj(text, path).vertices;
  return PointsFromJson(ParseJson(text, path), path);
}

}  // namespace raylift::io
