// raylift command-line front end. Exit codes: 0 success, 1 usage or
// unexpected failure, 2 schema/input error, 3 solver degeneracy, 4 fit
// non-convergence. Output files are written atomically.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "raylift/camera.hpp"
#include "raylift/farm.hpp"
#include "raylift/features.hpp"
#include "raylift/fit.hpp"
#include "raylift/io.hpp"
#include "raylift/metrics.hpp"
#include "raylift/solver.hpp"
#include "raylift/synth.hpp"
#include "raylift/temporal.hpp"

namespace {

using namespace raylift;
using io::json;

constexpr int kExitSchema = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNonConvergent = 4;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerate:
    case ErrorCode::kTooFewCorrespondences:
    case ErrorCode::kAllKeypointsMasked:
    case ErrorCode::kDegenerateComparison:
    case ErrorCode::kDegenerateConfiguration:
      return kExitDegenerate;
    case ErrorCode::kNonFiniteLoss:
      return kExitNonConvergent;
    default:
      return kExitSchema;
  }
}

std::vector<double> ParseList(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kSchema, what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kSchema, what + ": empty list");
  return out;
}

template <typename T>
void ReadField(const json& j, const char* key, T& field, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) {
    throw Error(ErrorCode::kSchema, where + ": '" + key + "' must be numeric");
  }
  field = j.at(key).get<T>();
}

// ---- lift -------------------------------------------------------------------

struct LiftArgs {
  std::string camera, frames, config, out, joints_out;
  bool kalman = false;
  bool skip_degenerate = false;
  int workers = 1;
};

struct LiftConfig {
  SolverConfig solver;
  KalmanConfig kalman;
};

LiftConfig LoadLiftConfig(const std::string& path) {
  LiftConfig cfg;
  if (path.empty()) return cfg;
  const json j = io::LoadJson(path);
  if (!j.is_object()) throw Error(ErrorCode::kSchema, path + ": expected an object");
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    ReadField(s, "epsilon", cfg.solver.epsilon, path);
    ReadField(s, "kappa_max", cfg.solver.kappa_max, path);
    ReadField(s, "damping", cfg.solver.damping, path);
    ReadField(s, "max_damp_rounds", cfg.solver.max_damp_rounds, path);
  }
  if (j.contains("kalman")) {
    const json& k = j.at("kalman");
    ReadField(k, "freq", cfg.kalman.freq, path);
    ReadField(k, "q_pos", cfg.kalman.q_pos, path);
    ReadField(k, "q_vel", cfg.kalman.q_vel, path);
    ReadField(k, "r_meas", cfg.kalman.r_meas, path);
  }
  try {
    cfg.solver.Validate();
    cfg.kalman.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
  return cfg;
}

std::vector<io::FrameRecord> LoadFrames(const std::string& path) {
  std::vector<io::FrameRecord> frames;
  for (const auto& j : io::ReadJsonl(path)) frames.push_back(io::FrameFromJson(j));
  if (frames.empty()) throw Error(ErrorCode::kSchema, path + ": no frames");
  std::sort(frames.begin(), frames.end(),
            [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
  for (size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame_id == frames[i - 1].frame_id) {
      throw Error(ErrorCode::kSchema,
                  "duplicate frame_id " + std::to_string(frames[i].frame_id));
    }
  }
  return frames;
}

int RunLift(const LiftArgs& args) {
  const CalibratedCamera cam = io::LoadCamera(args.camera);
  const LiftConfig cfg = LoadLiftConfig(args.config);
  const auto frames = LoadFrames(args.frames);

  // Solve frames in parallel; results land in input order.
  struct Slot {
    std::optional<LiftResult> result;
    std::optional<Error> error;
  };
  std::vector<Slot> slots(frames.size());
  const int workers = std::max(1, std::min<int>(args.workers, static_cast<int>(frames.size())));
  auto solve_range = [&](int worker) {
    for (size_t i = worker; i < frames.size(); i += workers) {
      try {
        slots[i].result = lift_frame(cam, frames[i].keypoints, frames[i].rel_joints, cfg.solver);
      } catch (const Error& e) {
        slots[i].error = e;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(solve_range, w);
  solve_range(0);
  for (auto& t : pool) t.join();

  for (size_t i = 0; i < frames.size(); ++i) {
    if (!slots[i].error) continue;
    const std::string msg =
        "frame_id " + std::to_string(frames[i].frame_id) + ": " + slots[i].error->what();
    if (!args.skip_degenerate) throw Error(slots[i].error->code(), msg);
    std::cerr << "skipped " << msg << "\n";
  }

  // Kalman pass over the frame_id timeline; gaps and skipped frames predict.
  std::vector<Eigen::Vector3d> translation(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    if (slots[i].result) translation[i] = slots[i].result->estimate.t;
  }
  if (args.kalman) {
    const long first = frames.front().frame_id;
    std::vector<std::optional<Eigen::Vector3d>> timeline(frames.back().frame_id - first + 1);
    for (size_t i = 0; i < frames.size(); ++i) {
      if (slots[i].result) timeline[frames[i].frame_id - first] = slots[i].result->estimate.t;
    }
    const auto filtered = filter_trajectory(
        std::span<const std::optional<Eigen::Vector3d>>(timeline), cfg.kalman);
    for (size_t i = 0; i < frames.size(); ++i) {
      translation[i] = filtered[frames[i].frame_id - first];
    }
  }

  std::string csv = "frame_id,tx,ty,tz,energy,kappa,damp_rounds\n";
  std::string jsonl;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (!slots[i].result) continue;
    const auto& est = slots[i].result->estimate;
    const Eigen::Vector3d& t = translation[i];
    csv += std::to_string(frames[i].frame_id) + "," + io::FormatDouble(t.x()) + "," +
           io::FormatDouble(t.y()) + "," + io::FormatDouble(t.z()) + "," +
           io::FormatDouble(est.energy) + "," + io::FormatDouble(est.kappa) + "," +
           std::to_string(est.damp_rounds) + "\n";
    io::JointRecord rec;
    rec.frame_id = frames[i].frame_id;
    rec.translation = t;
    for (const auto& rel : frames[i].rel_joints) rec.joints.push_back(rel + t);
    rec.visible = frames[i].visible;
    jsonl += io::JointRecordToJson(rec).dump() + "\n";
  }
  const std::string joints_out =
      args.joints_out.empty() ? args.out + ".joints.jsonl" : args.joints_out;
  io::AtomicWrite(args.out, csv);
  io::AtomicWrite(joints_out, jsonl);
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string pred, gt;
  double fps = 30.0;
  EvalOptions opts;
};

JointTrajectory LoadTrajectory(const std::string& path, std::vector<long>* ids) {
  JointTrajectory traj;
  std::vector<io::JointRecord> recs;
  for (const auto& j : io::ReadJsonl(path)) recs.push_back(io::JointRecordFromJson(j));
  std::sort(recs.begin(), recs.end(),
            [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
  bool any_mask = false;
  for (const auto& r : recs) any_mask = any_mask || !r.visible.empty();
  for (const auto& r : recs) {
    ids->push_back(r.frame_id);
    JointFrame f(static_cast<Eigen::Index>(r.joints.size()), 3);
    for (size_t k = 0; k < r.joints.size(); ++k) f.row(k) = r.joints[k].transpose();
    traj.frames.push_back(f);
    if (any_mask) {
      traj.visible.push_back(r.visible.empty() ? std::vector<bool>(r.joints.size(), true)
                                               : r.visible);
    }
  }
  return traj;
}

int RunEval(const EvalArgs& args) {
  if (!(args.fps > 0.0)) throw Error(ErrorCode::kSchema, "--fps must be positive");
  std::vector<long> pred_ids, gt_ids;
  JointTrajectory pred = LoadTrajectory(args.pred, &pred_ids);
  JointTrajectory gt = LoadTrajectory(args.gt, &gt_ids);
  if (pred_ids != gt_ids) throw Error(ErrorCode::kSchema, "prediction and gt frame ids differ");
  if (gt.frames.empty()) throw Error(ErrorCode::kSchema, "no frames to evaluate");
  pred.fps = gt.fps = args.fps;
  try {
    std::cout << io::MetricReportToJson(evaluate(pred, gt, args.opts)).dump(2) << "\n";
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kShapeMismatch || e.code() == ErrorCode::kJointMissing) {
      throw Error(ErrorCode::kSchema, e.what());
    }
    throw;
  }
  return 0;
}

// ---- farm -------------------------------------------------------------------

struct FarmBuildArgs {
  std::string shape, out;
  int n_theta = kDefaultNTheta;
};

int RunFarmBuild(const FarmBuildArgs& args) {
  const FarmShape shape = args.shape.empty() ? FarmShape{} : io::ShapeFromJson(io::LoadJson(args.shape), args.shape);
  FarmMesh mesh;
  try {
    mesh = build_mesh(shape, args.n_theta);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what());
  }
  const MeshCheck check = check_mesh(mesh);
  io::AtomicWrite(args.out, io::MeshToObj(mesh));
  const json report = {{"vertices", mesh.vertices.size()},
                       {"faces", mesh.faces.size()},
                       {"watertight", check.watertight()},
                       {"euler", check.euler},
                       {"volume_mm3", check.signed_volume},
                       {"frusta_volume_mm3", volume_frusta(shape)}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct FarmFitArgs {
  std::string cloud, elbow, wrist, config, out;
};

FitConfig LoadFitConfig(const std::string& path) {
  FitConfig cfg;
  if (path.empty()) return cfg;
  const json j = io::LoadJson(path);
  if (!j.is_object()) throw Error(ErrorCode::kSchema, path + ": expected an object");
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    ReadField(w, "pose_ring", cfg.weights.pose_ring, path);
    ReadField(w, "pose_full", cfg.weights.pose_full, path);
    ReadField(w, "shape_ring", cfg.weights.shape_ring, path);
    ReadField(w, "shape_full", cfg.weights.shape_full, path);
    ReadField(w, "shape_vol", cfg.weights.shape_vol, path);
    ReadField(w, "shape_taper", cfg.weights.shape_taper, path);
    ReadField(w, "shape_r1", cfg.weights.shape_r1, path);
    ReadField(w, "shape_r2", cfg.weights.shape_r2, path);
  }
  if (j.contains("optim")) {
    const json& o = j.at("optim");
    ReadField(o, "plateau_factor", cfg.optim.plateau_factor, path);
    ReadField(o, "plateau_patience", cfg.optim.plateau_patience, path);
    ReadField(o, "early_stop_patience", cfg.optim.early_stop_patience, path);
    ReadField(o, "early_stop_delta", cfg.optim.early_stop_delta, path);
    ReadField(o, "max_iters", cfg.optim.max_iters, path);
  }
  ReadField(j, "pose_lr", cfg.pose_lr, path);
  ReadField(j, "shape_lr_base", cfg.shape_lr_base, path);
  ReadField(j, "shape_lr_rho", cfg.shape_lr_rho, path);
  ReadField(j, "n_theta", cfg.n_theta, path);
  ReadField(j, "n_z", cfg.n_z, path);
  ReadField(j, "min_radius", cfg.min_radius, path);
  if (j.contains("target_volume")) {
    double v = 0.0;
    ReadField(j, "target_volume", v, path);
    cfg.target_volume = v;
  }
  try {
    cfg.optim.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
  if (cfg.n_theta < 3 || cfg.n_z < 2) throw Error(ErrorCode::kSchema, path + ": bad mesh resolution");
  return cfg;
}

int RunFarmFit(const FarmFitArgs& args) {
  const FitConfig cfg = LoadFitConfig(args.config);
  const auto cloud = io::LoadPointCloud(args.cloud);
  const auto elbow = io::LoadPointCloud(args.elbow);
  const auto wrist = io::LoadPointCloud(args.wrist);
  FitResult result;
  try {
    result = fit_farm(cloud, elbow, wrist, cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonFiniteLoss) throw;
    throw Error(ErrorCode::kSchema, e.what());
  }
  io::AtomicWrite(args.out, io::FitResultToJson(result).dump(2) + "\n");
  if (!result.converged) {
    std::cerr << "fit stopped at max_iters before the early-stopping criterion\n";
    return kExitNonConvergent;
  }
  return 0;
}

struct FarmPcaArgs {
  std::string corpus, out;
  int d = 5;
};

int RunFarmPca(const FarmPcaArgs& args) {
  // JSONL of shapes, or a JSON array of shapes.
  std::vector<json> items;
  const std::string text = io::ReadFile(args.corpus);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const json arr = io::ParseJson(text, args.corpus);
    items.assign(arr.begin(), arr.end());
  } else {
    items = io::ReadJsonl(args.corpus);
  }
  std::vector<Eigen::VectorXd> corpus;
  for (size_t i = 0; i < items.size(); ++i) {
    corpus.push_back(io::ShapeFromJson(items[i], args.corpus + " entry " + std::to_string(i)).ToVector());
  }
  if (corpus.empty()) throw Error(ErrorCode::kSchema, args.corpus + ": empty corpus");
  PcaSpace pca;
  try {
    pca = train_pca(corpus, args.d);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what());
  }
  io::AtomicWrite(args.out, io::PcaToJson(pca).dump(2) + "\n");
  std::cout << json{{"explained", pca.explained}, {"d", pca.dim()}, {"n_z", pca.n_z()}}.dump()
            << "\n";
  return 0;
}

// ---- cit / camgeo / synth / tune ----------------------------------------------

struct CitArgs {
  std::string camera, box, out;
};

int RunCit(const CitArgs& args) {
  const CalibratedCamera cam = io::LoadCamera(args.camera);
  const auto b = ParseList(args.box, "--box");
  if (b.size() != 4) throw Error(ErrorCode::kSchema, "--box needs x0,y0,x1,y1");
  const CropIntrinsics ci = crop_intrinsics(cam, {b[0], b[1], b[2], b[3]});
  const auto ci_arr = ci.ToArray();
  const CitVector cit = sinusoidal_encode(ci);
  const json out = {{"ci", std::vector<double>(ci_arr.begin(), ci_arr.end())},
                    {"cit", std::vector<double>(cit.begin(), cit.end())}};
  if (args.out.empty()) {
    std::cout << out.dump() << "\n";
  } else {
    io::AtomicWrite(args.out, out.dump() + "\n");
  }
  return 0;
}

struct CamgeoArgs {
  std::string ref, other, depths = "200,500,1000";
  int grid = 32;
};

int RunCamgeo(const CamgeoArgs& args) {
  const CalibratedCamera ref = io::LoadCamera(args.ref);
  const CalibratedCamera other = io::LoadCamera(args.other);
  const auto depths = ParseList(args.depths, "--depths");
  const double err = camera_geometry_error(ref, other, depths, args.grid);
  std::cout << json{{"camera_geometry_error_mm", err}}.dump() << "\n";
  return 0;
}

struct SynthArgs {
  std::string camera, out, gt;
  int frames = 100;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double confidence = -1.0;
  double hand_scale = 90.0;
};

int RunSynth(const SynthArgs& args) {
  const CalibratedCamera cam = io::LoadCamera(args.camera);
  const SyntheticScene scene =
      gen_scene(cam, args.frames, {}, NoiseSpec{args.sigma, args.confidence}, args.seed,
                args.hand_scale);
  std::string frames, gt;
  for (int f = 0; f < args.frames; ++f) {
    io::FrameRecord rec;
    rec.frame_id = f;
    rec.keypoints = scene.keypoints[f];
    rec.visible.assign(rec.keypoints.size(), true);
    rec.rel_joints = scene.rel_joints[f];
    frames += io::FrameToJson(rec).dump() + "\n";
    io::JointRecord g;
    g.frame_id = f;
    g.translation = scene.translations[f];
    g.joints = scene.CameraJoints(f);
    gt += io::JointRecordToJson(g).dump() + "\n";
  }
  io::AtomicWrite(args.out, frames);
  io::AtomicWrite(args.gt, gt);
  return 0;
}

struct TuneArgs {
  std::string noisy, gt, q_pos = "1,10,100,1000,10000", q_vel = "1,10,100",
                         r_meas = "10,100,1000,10000";
  double lambda = 0.7;
  double freq = 30.0;
};

std::vector<Eigen::Vector3d> LoadTranslations(const std::string& path, std::vector<long>* ids) {
  std::vector<io::JointRecord> recs;
  for (const auto& j : io::ReadJsonl(path)) recs.push_back(io::JointRecordFromJson(j));
  std::sort(recs.begin(), recs.end(),
            [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
  std::vector<Eigen::Vector3d> out;
  for (const auto& r : recs) {
    ids->push_back(r.frame_id);
    out.push_back(r.translation);
  }
  return out;
}

int RunTune(const TuneArgs& args) {
  std::vector<long> a, b;
  const auto noisy = LoadTranslations(args.noisy, &a);
  const auto gt = LoadTranslations(args.gt, &b);
  if (a != b) throw Error(ErrorCode::kSchema, "noisy and gt frame ids differ");
  TuneConfig tc{args.lambda, ParseList(args.q_pos, "--q-pos"), ParseList(args.q_vel, "--q-vel"),
                ParseList(args.r_meas, "--r-meas")};
  const KalmanConfig best = grid_tune(noisy, gt, tc, args.freq);
  const double loss = tune_objective(filter_trajectory(noisy, best), gt, args.lambda);
  std::cout << json{{"freq", best.freq},
                    {"q_pos", best.q_pos},
                    {"q_vel", best.q_vel},
                    {"r_meas", best.r_meas},
                    {"objective", loss}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raylift: camera-space hand and forearm lifting toolkit"};
  app.require_subcommand(1);

  LiftArgs lift;
  auto* lift_cmd = app.add_subcommand("lift", "Lift 2D keypoints to camera space");
  lift_cmd->add_option("--camera", lift.camera, "Camera calibration JSON")->required();
  lift_cmd->add_option("--frames", lift.frames, "Frames JSONL")->required();
  lift_cmd->add_option("--config", lift.config, "Solver and Kalman config JSON");
  lift_cmd->add_option("--out", lift.out, "Trajectory CSV")->required();
  lift_cmd->add_option("--joints-out", lift.joints_out,
                       "Camera-space joints JSONL (default: <out>.joints.jsonl)");
  lift_cmd->add_option("--workers", lift.workers, "Solver threads")->check(CLI::PositiveNumber);
  lift_cmd->add_flag("--kalman", lift.kalman, "Smooth translations with the Kalman filter");
  lift_cmd->add_flag("--skip-degenerate", lift.skip_degenerate,
                     "Drop frames the solver rejects instead of failing");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predicted joints against ground truth");
  eval_cmd->add_option("--pred", eval.pred, "Predicted joints JSONL")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth joints JSONL")->required();
  eval_cmd->add_option("--fps", eval.fps, "Frame rate for ACC");
  eval_cmd->add_option("--root", eval.opts.root, "Root joint index");
  eval_cmd->add_option("--wrist", eval.opts.wrist, "Wrist joint index");
  eval_cmd->add_option("--middle-mcp", eval.opts.middle_mcp, "Middle MCP joint index");

  auto* farm_cmd = app.add_subcommand("farm", "Forearm model tools");
  farm_cmd->require_subcommand(1);
  FarmBuildArgs build;
  auto* build_cmd = farm_cmd->add_subcommand("build", "Write a FARM mesh as OBJ");
  build_cmd->add_option("--shape", build.shape, "Shape JSON (default shape if omitted)");
  build_cmd->add_option("--n-theta", build.n_theta, "Vertices per ring");
  build_cmd->add_option("--out", build.out, "Output OBJ")->required();
  FarmFitArgs fit;
  auto* fit_cmd = farm_cmd->add_subcommand("fit", "Fit FARM to a point cloud");
  fit_cmd->add_option("--cloud", fit.cloud, "Target cloud (OBJ or JSON)")->required();
  fit_cmd->add_option("--elbow-ring", fit.elbow, "Elbow ring points")->required();
  fit_cmd->add_option("--wrist-ring", fit.wrist, "Wrist ring points")->required();
  fit_cmd->add_option("--config", fit.config, "Fit config JSON");
  fit_cmd->add_option("--out", fit.out, "FitResult JSON")->required();
  FarmPcaArgs pca;
  auto* pca_cmd = farm_cmd->add_subcommand("pca", "Train a PCA shape space");
  pca_cmd->add_option("--corpus", pca.corpus, "Shapes (JSONL or JSON array)")->required();
  pca_cmd->add_option("--d", pca.d, "Number of components");
  pca_cmd->add_option("--out", pca.out, "PcaSpace JSON")->required();

  CitArgs cit;
  auto* cit_cmd = app.add_subcommand("cit", "Crop intrinsics and their encoding");
  cit_cmd->add_option("--camera", cit.camera, "Camera calibration JSON")->required();
  cit_cmd->add_option("--box", cit.box, "Crop box x0,y0,x1,y1 in pixels")->required();
  cit_cmd->add_option("--out", cit.out, "Write JSON here instead of stdout");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sequence");
  synth_cmd->add_option("--camera", synth.camera, "Camera calibration JSON")->required();
  synth_cmd->add_option("--frames", synth.frames, "Frame count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--sigma", synth.sigma, "Pixel noise sigma");
  synth_cmd->add_option("--confidence", synth.confidence, "Keypoint confidence (default 1/(1+sigma))");
  synth_cmd->add_option("--hand-scale", synth.hand_scale, "Wrist to middle-MCP distance, mm");
  synth_cmd->add_option("--out", synth.out, "Frames JSONL")->required();
  synth_cmd->add_option("--gt", synth.gt, "Ground-truth joints JSONL")->required();

  CamgeoArgs camgeo;
  auto* camgeo_cmd = app.add_subcommand("camgeo", "Ray displacement between two calibrations");
  camgeo_cmd->add_option("--ref", camgeo.ref, "Reference camera JSON")->required();
  camgeo_cmd->add_option("--other", camgeo.other, "Perturbed camera JSON")->required();
  camgeo_cmd->add_option("--depths", camgeo.depths, "Comma-separated depths, mm");
  camgeo_cmd->add_option("--grid", camgeo.grid, "Grid cells per side");

  TuneArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "Grid-search Kalman noise parameters");
  tune_cmd->add_option("--noisy", tune.noisy, "Raw translations (joints JSONL)")->required();
  tune_cmd->add_option("--gt", tune.gt, "Ground-truth joints JSONL")->required();
  tune_cmd->add_option("--lambda", tune.lambda, "Fidelity weight in [0, 1]");
  tune_cmd->add_option("--freq", tune.freq, "Frame rate");
  tune_cmd->add_option("--q-pos", tune.q_pos, "Comma-separated grid");
  tune_cmd->add_option("--q-vel", tune.q_vel, "Comma-separated grid");
  tune_cmd->add_option("--r-meas", tune.r_meas, "Comma-separated grid");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*lift_cmd) return RunLift(lift);
    if (*eval_cmd) return RunEval(eval);
    if (*build_cmd) return RunFarmBuild(build);
    if (*fit_cmd) return RunFarmFit(fit);
    if (*pca_cmd) return RunFarmPca(pca);
    if (*cit_cmd) return RunCit(cit);
    if (*synth_cmd) return RunSynth(synth);
    if (*camgeo_cmd) return RunCamgeo(camgeo);
    if (*tune_cmd) return RunTune(tune);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
