// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check compares library output against an independent oracle
// or closed form computed here.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "raylift/io.hpp"
#include "raylift/raylift.hpp"
#include "test_util.hpp"

namespace {

using namespace raylift;
using testing::RandomUnit;
using testing::RandomVec;
using Points = std::vector<Eigen::Vector3d>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

// E(t) written directly from the point-to-ray definition.
double EnergyOracle(const Eigen::Vector3d& t, const std::vector<Correspondence>& corrs) {
  double e = 0.0;
  for (const auto& c : corrs) {
    const Eigen::Vector3d p = t + c.joint;
    e += c.weight * (p - c.ray.dot(p) * c.ray).squaredNorm();
  }
  return e;
}

// ---------------------------------------------------------------------------

Outcome Ac1SolverExactness() {
  const CalibratedCamera cams[] = {testing::PinholeCam(), testing::EquidistantCam(),
                                   testing::KannalaBrandtCam()};
  double worst = 0.0, seconds = 0.0;
  for (const auto& cam : cams) {
    const SyntheticScene scene = gen_scene(cam, 1000, {}, {}, 2024);
    std::vector<LiftResult> lifted;
    lifted.reserve(1000);
    const auto start = std::chrono::steady_clock::now();
    for (int f = 0; f < 1000; ++f) {
      lifted.push_back(lift_frame(cam, scene.keypoints[f], scene.rel_joints[f]));
    }
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double sum = 0.0;
    long count = 0;
    for (int f = 0; f < 1000; ++f) {
      const Skeleton truth = scene.CameraJoints(f);
      for (size_t j = 0; j < truth.size(); ++j) {
        sum += (lifted[f].joints[j] - truth[j]).norm();
        ++count;
      }
    }
    worst = std::max(worst, sum / count);
  }
  return {worst < 1e-6 && seconds < 10.0,
          Fmt("worst CS-MJE %.3g mm over 3x1000 frames, %.2f s", worst, seconds)};
}

// Coarse-to-fine exhaustive search. Each level scans a full cube around the
// incumbent and re-centres until the best point is interior.
Eigen::Vector3d GridMinimize(const std::vector<Correspondence>& corrs, Eigen::Vector3d centre) {
  auto scan = [&](double step, int n) {
    for (;;) {
      Eigen::Vector3d best = centre;
      double best_e = EnergyOracle(centre, corrs);
      int bi = 0, bj = 0, bk = 0;
      for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
          for (int k = -n; k <= n; ++k) {
            const Eigen::Vector3d t = centre + step * Eigen::Vector3d(i, j, k);
            const double e = EnergyOracle(t, corrs);
            if (e < best_e) {
              best_e = e;
              best = t;
              bi = i, bj = j, bk = k;
            }
          }
        }
      }
      centre = best;
      if (std::max({std::abs(bi), std::abs(bj), std::abs(bk)}) < n) return;
    }
  };
  scan(0.5, 20);  // the 20 mm cube
  for (double step = 0.1; step >= 1e-5; step /= 10.0) scan(step, 12);
  return centre;
}

Outcome Ac2ClosedFormVsBruteForce() {
  const CalibratedCamera cam = testing::PinholeCam();  // fx = 600
  std::mt19937_64 rng(7);
  std::normal_distribution<double> px(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Skeleton skel = gen_skeleton(90.0, trial);
    const Eigen::Matrix3d R = RandomRotation(rng);
    Eigen::Vector3d t_gt = RandomVec(rng, 30);
    t_gt.z() = 400.0;
    std::vector<Correspondence> corrs;
    for (const auto& j : skel) {
      const Eigen::Vector3d rel = R * j;
      const Eigen::Vector2d uv = project(cam, t_gt + rel) + Eigen::Vector2d(px(rng), px(rng));
      corrs.push_back({rel, unproject_ray(cam, uv.x(), uv.y()), 1.0});
    }
    const FrameEstimate est = solve_translation(corrs);
    const Eigen::Vector3d grid = GridMinimize(corrs, t_gt);
    worst = std::max(worst, (grid - est.t).norm());
  }
  return {worst < 1e-3, Fmt("max |t_closed - t_grid| = %.3g mm over 20 instances", worst)};
}

// Golden-section minimum of w || p - lambda d ||^2 over the depth lambda.
double DepthMin(const Eigen::Vector3d& p, const Eigen::Vector3d& d, double w) {
  auto f = [&](double l) { return w * (p - l * d).squaredNorm(); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -1e4, b = 1e4;
  for (int k = 0; k < 200; ++k) {
    const double c = b - g * (b - a), e = a + g * (b - a);
    if (f(c) < f(e)) {
      b = e;
    } else {
      a = c;
    }
  }
  return f(0.5 * (a + b));
}

Outcome Ac3DepthElimination() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0.05, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Correspondence> corrs;
    const int n = 2 + trial % 23;
    for (int i = 0; i < n; ++i) corrs.push_back({RandomVec(rng, 100), RandomUnit(rng), w(rng)});
    const Eigen::Vector3d t = RandomVec(rng, 500);
    double two_term = 0.0;
    for (const auto& c : corrs) two_term += DepthMin(t + c.joint, c.ray, c.weight);
    worst = std::max(worst, std::abs(energy(t, corrs) - two_term) / std::max(1.0, two_term));
  }
  return {worst < 1e-9, Fmt("max relative gap %.3g over 100 configurations", worst)};
}

Outcome Ac4ConditioningGuard() {
  std::mt19937_64 rng(4);
  std::vector<Correspondence> corrs;
  const Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  for (int i = 0; i < 24; ++i) corrs.push_back({RandomVec(rng, 80), axis, 0.3 + 0.05 * i});
  const FrameEstimate est = solve_translation(corrs);
  // 2-D weighted least squares: min sum w || (t + J)_xy ||^2.
  Eigen::Vector2d num = Eigen::Vector2d::Zero();
  double den = 0.0;
  for (const auto& c : corrs) {
    num += c.weight * c.joint.head<2>();
    den += c.weight;
  }
  const Eigen::Vector2d xy = -num / den;
  const double gap = (est.t.head<2>() - xy).norm();
  const bool ok = est.t.allFinite() && est.damp_rounds >= 1 && gap < 1e-6;
  return {ok, Fmt("damp_rounds %.0f, |t_xy - wls| = %.3g mm", est.damp_rounds, gap)};
}

double AccOracle(const std::vector<Skeleton>& pred, const std::vector<Skeleton>& gt, double fps) {
  double sum = 0.0;
  long count = 0;
  for (size_t f = 1; f + 1 < pred.size(); ++f) {
    for (size_t j = 0; j < pred[f].size(); ++j) {
      const Eigen::Vector3d ap = pred[f - 1][j] - 2.0 * pred[f][j] + pred[f + 1][j];
      const Eigen::Vector3d ag = gt[f - 1][j] - 2.0 * gt[f][j] + gt[f + 1][j];
      sum += (ap - ag).norm();
      ++count;
    }
  }
  return sum / count * fps * fps / 1000.0;
}

Outcome Ac5KalmanSmoothing() {
  const CalibratedCamera cam = testing::PinholeCam();
  double raw_total = 0.0, kf_total = 0.0, worst_seed = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticScene s = gen_scene(cam, 300, {}, NoiseSpec{1.0}, seed);
    std::vector<Eigen::Vector3d> raw_t;
    for (size_t f = 0; f < s.translations.size(); ++f) {
      raw_t.push_back(lift_frame(cam, s.keypoints[f], s.rel_joints[f]).estimate.t);
    }
    const auto kf_t = filter_trajectory(raw_t, KalmanConfig{});
    std::vector<Skeleton> gt, raw, kf;
    for (size_t f = 0; f < raw_t.size(); ++f) {
      gt.push_back(s.CameraJoints(f));
      Skeleton a = s.rel_joints[f], b = s.rel_joints[f];
      for (auto& p : a) p += raw_t[f];
      for (auto& p : b) p += kf_t[f];
      raw.push_back(a);
      kf.push_back(b);
    }
    const double r = AccOracle(raw, gt, 30.0), k = AccOracle(kf, gt, 30.0);
    raw_total += r;
    kf_total += k;
    worst_seed = std::min(worst_seed, 1.0 - k / r);
  }
  const double reduction = 1.0 - kf_total / raw_total;
  return {reduction >= 0.20,
          Fmt("CS-ACC %.3f -> %.3f m/s^2 (%.1f%% lower)", raw_total / 10, kf_total / 10,
              100 * reduction) +
              Fmt(", worst seed %.1f%%", 100 * worst_seed)};
}

Outcome Ac6FarmGeometry() {
  const double pi = std::numbers::pi;
  const double cyl = volume_frusta(FarmShape::Cylinder(1, 2));
  const double cone = volume_frusta(FarmShape{1, 0, 3, std::vector<double>(kDefaultNz, 0.0)});
  const double cyl_err = std::abs(cyl - 2 * pi) / (2 * pi);
  const double cone_err = std::abs(cone - pi) / pi;

  const double a = 2 * pi / 50;
  const FarmShape c = FarmShape::Cylinder(30, 250);
  const double ratio = mesh_volume(build_mesh(c, 50)) / volume_frusta(c);
  const double ratio_err = std::abs(ratio - std::sin(a) / a);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> r(10, 60), h(100, 400), off(-5, 5);
  std::uniform_int_distribution<int> nt(3, 64), nz(2, 20);
  int watertight = 0;
  for (int k = 0; k < 200; ++k) {
    FarmShape s{r(rng), r(rng), h(rng), std::vector<double>(nz(rng))};
    for (auto& v : s.rho) v = off(rng);
    const FarmMesh m = build_mesh(s, nt(rng));
    const MeshCheck chk = check_mesh(m);
    watertight += chk.watertight() && chk.signed_volume > 0.0;
  }
  const bool ok = cyl_err <= 1e-12 && cone_err <= 1e-12 && ratio_err <= 1e-6 && watertight == 200;
  return {ok, Fmt("rel err cyl %.2g cone %.2g, ratio err %.2g", cyl_err, cone_err, ratio_err) +
                  ", watertight " + std::to_string(watertight) + "/200"};
}

Outcome Ac7SwingTwist() {
  std::mt19937_64 rng(7);
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Matrix3d R = RandomRotation(rng);
    const SwingTwist st = swing_twist(R);
    // The swing's axis lies in the xy-plane: its skew part has no z component.
    const double swing_axis_z = std::abs(st.swing(1, 0) - st.swing(0, 1));
    worst = std::max({worst, (st.swing * st.twist - R).norm(), (st.twist * z - z).norm(),
                      (st.swing * z - R * z).norm(), swing_axis_z,
                      (st.swing.transpose() * st.swing - Eigen::Matrix3d::Identity()).norm(),
                      (st.twist.transpose() * st.twist - Eigen::Matrix3d::Identity()).norm()});
  }
  return {worst < 1e-10, Fmt("max identity residual %.3g over 1000 rotations", worst)};
}

Outcome Ac8FarmFitting() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> r1(32, 42), r2(22, 30), h(220, 290);
  double worst_param = 0.0, worst_wrist = 0.0;
  for (int k = 0; k < 10; ++k) {
    const FarmShape truth{r1(rng), r2(rng), h(rng), std::vector<double>(kDefaultNz, 0.0)};
    const Eigen::Matrix3d R = swing_twist(RandomRotation(rng)).swing;
    const FarmMesh target = apply_pose(build_mesh(truth), R, RandomVec(rng, 300));
    FitConfig cfg;
    cfg.n_theta = 20;
    const FitResult fit =
        fit_farm(target.SurfacePoints(), target.Ring(0), target.Ring(kDefaultNz - 1), cfg);
    worst_param = std::max({worst_param, std::abs(fit.shape.r1 / truth.r1 - 1),
                            std::abs(fit.shape.r2 / truth.r2 - 1),
                            std::abs(fit.shape.h / truth.h - 1)});
    worst_wrist = std::max(worst_wrist, (fit.joints.wrist - target.joints.wrist).norm());
  }

  // Analytic gradients against central differences.
  double worst_grad = 0.0;
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 20; ++k) {
    FarmShape s{38 + 3 * u(rng), 26 + 3 * u(rng), 250 + 20 * u(rng), std::vector<double>(6)};
    for (auto& v : s.rho) v = 2 * u(rng);
    FarmPose pose{swing_twist(RandomRotation(rng)).swing, RandomVec(rng, 200)};
    const FarmMesh mesh = apply_pose(build_mesh(s, 10), pose.rotation, pose.t);
    const Points rings = mesh.BoundaryRings(), full = mesh.SurfacePoints();

    const PoseObjective pose_obj(s, 10, rings, full, FitWeights{});
    Eigen::VectorXd x(9);
    for (int i = 0; i < 6; ++i) x(i) = n(rng);
    x.segment<3>(6) = pose.t + RandomVec(rng, 20);
    Eigen::VectorXd g;
    pose_obj(x, &g);
    worst_grad = std::max(worst_grad, testing::RelativeError(g, testing::NumericGradient(
        [&](const Eigen::VectorXd& v) { return pose_obj(v, nullptr); }, x, 1e-6)));

    const ShapeObjective shape_obj(pose, 10, 6, rings, full, FitWeights{},
                                   1.1 * volume_frusta(s), 30, 30);
    Eigen::VectorXd y = FarmShape{36, 27, 240, {1, -1, 0.5, 0, 0.3, -0.2}}.ToVector();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.5 * u(rng);
    shape_obj(y, &g);
    worst_grad = std::max(worst_grad, testing::RelativeError(g, testing::NumericGradient(
        [&](const Eigen::VectorXd& v) { return shape_obj(v, nullptr); }, y, 1e-6)));
  }
  const bool ok = worst_param <= 0.02 && worst_wrist <= 3.0 && worst_grad < 1e-4;
  return {ok, Fmt("worst param err %.2f%%, wrist %.3f mm, gradient rel err %.2g",
                  100 * worst_param, worst_wrist, worst_grad)};
}

Outcome Ac9Pca() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 1);
  Eigen::MatrixXd factors(15, 5);
  for (int i = 0; i < factors.size(); ++i) factors(i) = 4.0 * g(rng);
  const Eigen::VectorXd base = FarmShape{}.ToVector();
  std::vector<Eigen::VectorXd> corpus;
  for (int k = 0; k < 500; ++k) {
    Eigen::VectorXd z(5), e(15);
    for (int i = 0; i < 5; ++i) z(i) = g(rng);
    for (int i = 0; i < 15; ++i) e(i) = 0.05 * g(rng);
    corpus.push_back(base + factors * z + e);
  }
  const PcaSpace pca = train_pca(corpus, 5);
  return {pca.explained >= 0.99, Fmt("explained variance %.5f at d=5", pca.explained)};
}

JointTrajectory ToTrajectory(const std::vector<Eigen::MatrixXd>& frames, double fps) {
  JointTrajectory t;
  t.fps = fps;
  for (const auto& f : frames) t.frames.push_back(f);
  return t;
}

Outcome Ac10Metrics() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::vector<Eigen::MatrixXd> gt, sim, rigid;
  for (int f = 0; f < 50; ++f) {
    Eigen::MatrixXd g(21, 3);
    for (int j = 0; j < 21; ++j) g.row(j) = (RandomVec(rng, 60) + Eigen::Vector3d(0, 0, 450)).transpose();
    const Eigen::Matrix3d R = RandomRotation(rng);
    const Eigen::RowVector3d t = RandomVec(rng, 200).transpose();
    gt.push_back(g);
    sim.push_back((scale(rng) * g * R.transpose()).rowwise() + t);
    rigid.push_back((g * R.transpose()).rowwise() + t);
  }
  const double ps = ps_mje(ToTrajectory(sim, 30), ToTrajectory(gt, 30));
  const double hs = hand_scale_error(ToTrajectory(rigid, 30), ToTrajectory(gt, 30));

  // Single-axis sinusoid of amplitude A at frequency nu: the continuous
  // acceleration magnitude averages to A (2 pi nu)^2 * 2 / pi.
  const double A = 10.0, nu = 1.0, fps = 60.0;
  std::vector<Eigen::MatrixXd> still, wobble;
  for (int k = 0; k <= 600; ++k) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Constant(21, 3, 100.0);
    still.push_back(g);
    g.col(0).array() += A * std::sin(2 * std::numbers::pi * nu * k / fps);
    wobble.push_back(g);
  }
  const double analytic = A * std::pow(2 * std::numbers::pi * nu, 2) * 2 / std::numbers::pi / 1000;
  const double acc = acc_error(ToTrajectory(wobble, fps), ToTrajectory(still, fps));
  const double acc_rel = std::abs(acc - analytic) / analytic;
  const bool ok = ps < 1e-9 && acc_rel < 0.01 && hs < 1e-9;
  return {ok, Fmt("PS-MJE %.2g mm, ACC rel err %.3g, hand-scale err %.2g mm", ps, acc_rel, hs)};
}

Outcome Ac11Cit() {
  std::mt19937_64 rng(11);
  const CalibratedCamera cams[] = {testing::PinholeCam(), testing::EquidistantCam(),
                                   testing::KannalaBrandtCam()};
  std::uniform_real_distribution<double> half(5, 150), x0(0, 400), y0(0, 300), size(20, 200);
  bool centred = true, bounded = true, bitwise = true;
  for (const auto& cam : cams) {
    const double cx = cam.intrinsics().cx, cy = cam.intrinsics().cy;
    for (int k = 0; k < 100; ++k) {
      const double hw = half(rng), hh = half(rng);
      const CropIntrinsics c = crop_intrinsics(cam, {cx - hw, cy - hh, cx + hw, cy + hh});
      centred = centred && std::abs(c.p_x) < 1e-12 && std::abs(c.p_y) < 1e-12;
      const double bx = x0(rng), by = y0(rng);
      const CitVector cit = sinusoidal_encode(crop_intrinsics(cam, {bx, by, bx + size(rng), by + size(rng)}));
      for (double v : cit) bounded = bounded && std::abs(v) <= 1.0;
    }
  }
  // Pinhole: routing the corners through undistortion changes no bit.
  const CalibratedCamera pin = cams[0];
  for (int k = 0; k < 100; ++k) {
    const double bx = x0(rng), by = y0(rng);
    const CropBox box{bx, by, bx + size(rng), by + size(rng)};
    const CropIntrinsics direct = crop_intrinsics(pin, box);
    const Eigen::Vector2d p11 = undistort_point(pin, box.x0, box.y0);
    const Eigen::Vector2d p22 = undistort_point(pin, box.x1, box.y1);
    const Eigen::Vector2d p12 = undistort_point(pin, box.x0, box.y1);
    const Eigen::Vector2d p21 = undistort_point(pin, box.x1, box.y0);
    const double w = p22.x() - p11.x(), h = p22.y() - p11.y();
    const double cu = 0.5 * (p11.x() + p22.x()), cv = 0.5 * (p11.y() + p22.y());
    bitwise = bitwise && direct.p_x == (pin.intrinsics().cx - cu) / w &&
              direct.p_y == (pin.intrinsics().cy - cv) / h &&
              direct.log_rw == std::log(w / pin.intrinsics().width) &&
              direct.log_rh == std::log(h / pin.intrinsics().height) &&
              direct.theta_11 == viewing_direction(pin, p11.x(), p11.y()) &&
              direct.theta_12 == viewing_direction(pin, p12.x(), p12.y()) &&
              direct.theta_21 == viewing_direction(pin, p21.x(), p21.y()) &&
              direct.theta_22 == viewing_direction(pin, p22.x(), p22.y()) &&
              direct.theta_c == viewing_direction(pin, cu, cv);
  }
  return {centred && bounded && bitwise,
          std::string("centred p=0: ") + (centred ? "yes" : "no") +
              ", entries in [-1,1]: " + (bounded ? "yes" : "no") +
              ", pinhole bitwise: " + (bitwise ? "yes" : "no")};
}

Outcome Ac12CameraRoundTrips() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 640), v(0, 480);
  double worst_px = 0.0;
  for (const auto& cam : {testing::PinholeCam(), testing::EquidistantCam(),
                          testing::KannalaBrandtCam()}) {
    for (int k = 0; k < 2000; ++k) {
      const double pu = u(rng), pv = v(rng);
      const Eigen::Vector3d d = unproject_ray(cam, pu, pv);
      for (double depth : {50.0, 400.0, 3000.0}) {
        worst_px = std::max(worst_px, (project(cam, depth * d) - Eigen::Vector2d(pu, pv)).norm());
      }
    }
  }
  const CalibratedCamera kb({300, 300, 320, 240, 640, 480}, KannalaBrandt{{0, 0, 0, 0}});
  const CalibratedCamera eq = testing::EquidistantCam();
  double worst_kb = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double pu = u(rng), pv = v(rng);
    worst_kb = std::max(worst_kb, (unproject_ray(kb, pu, pv) - unproject_ray(eq, pu, pv)).norm());
    const Eigen::Vector3d p = RandomVec(rng, 200) + Eigen::Vector3d(0, 0, 300);
    worst_kb = std::max(worst_kb, (project(kb, p) - project(eq, p)).norm());
  }
  return {worst_px < 1e-6 && worst_kb < 1e-10,
          Fmt("round trip %.3g px, KB(0) vs equidistant %.3g", worst_px, worst_kb)};
}

namespace fs = std::filesystem;

int RunCli(const std::string& args) {
  const std::string cmd = std::string(RAYLIFT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Ac13CliDeterminismAndAtomicity() {
  const fs::path dir = fs::temp_directory_path() / ("raylift_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto path = [&](const char* name) { return (dir / name).string(); };
  io::AtomicWrite(path("cam.json"), io::CameraToJson(testing::KannalaBrandtCam()).dump());

  bool identical = true;
  std::string first_frames, first_csv, first_joints;
  for (int run = 0; run < 2; ++run) {
    const std::string tag = std::to_string(run);
    identical = identical &&
                RunCli("synth --camera " + path("cam.json") + " --frames 80 --seed 5 --sigma 1.5" +
                       " --out " + path("f.jsonl") + " --gt " + path("gt.jsonl")) == 0 &&
                RunCli("lift --kalman --workers " + std::to_string(1 + 3 * run) + " --camera " +
                       path("cam.json") + " --frames " + path("f.jsonl") + " --out " +
                       path("t.csv")) == 0;
    const std::string frames = io::ReadFile(path("f.jsonl"));
    const std::string csv = io::ReadFile(path("t.csv"));
    const std::string joints = io::ReadFile(path("t.csv.joints.jsonl"));
    if (run == 0) {
      first_frames = frames, first_csv = csv, first_joints = joints;
    } else {
      identical = identical && frames == first_frames && csv == first_csv && joints == first_joints;
    }
  }

  // Schema errors: no new output appears and an existing output is untouched.
  io::AtomicWrite(path("bad.json"), "{\"model\": \"pinhole\", \"fx\": ");
  std::string frames = io::ReadFile(path("f.jsonl"));
  frames.insert(frames.rfind('{'), "{\"frame_id\": 99, \"keypoints\": 3}\n");
  io::AtomicWrite(path("bad.jsonl"), frames);
  const int code_cam = RunCli("lift --camera " + path("bad.json") + " --frames " + path("f.jsonl") +
                              " --out " + path("new.csv"));
  const int code_frames = RunCli("lift --camera " + path("cam.json") + " --frames " +
                                 path("bad.jsonl") + " --out " + path("t.csv"));
  bool atomic = code_cam == 2 && code_frames == 2 && !fs::exists(path("new.csv")) &&
                !fs::exists(path("new.csv.joints.jsonl")) &&
                io::ReadFile(path("t.csv")) == first_csv;
  for (const auto& e : fs::directory_iterator(dir)) {
    atomic = atomic && e.path().string().find(".tmp") == std::string::npos;
  }
  fs::remove_all(dir);
  return {identical && atomic, std::string("identical bytes: ") + (identical ? "yes" : "no") +
                                   ", schema errors leave no partial output: " +
                                   (atomic ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 solver exactness", Ac1SolverExactness},
      {"AC2 closed form vs brute force", Ac2ClosedFormVsBruteForce},
      {"AC3 depth elimination identity", Ac3DepthElimination},
      {"AC4 conditioning guard", Ac4ConditioningGuard},
      {"AC5 Kalman smoothing", Ac5KalmanSmoothing},
      {"AC6 FARM geometry", Ac6FarmGeometry},
      {"AC7 swing-twist", Ac7SwingTwist},
      {"AC8 FARM fitting", Ac8FarmFitting},
      {"AC9 PCA", Ac9Pca},
      {"AC10 metrics", Ac10Metrics},
      {"AC11 CIT", Ac11Cit},
      {"AC12 camera round trips", Ac12CameraRoundTrips},
      {"AC13 CLI determinism and atomicity", Ac13CliDeterminismAndAtomicity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str());
    std::fflush(stdout);
    failed += !out.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
