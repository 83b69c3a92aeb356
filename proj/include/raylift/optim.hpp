#pragma once

// Full-batch Adam with per-group learning rates, a reduce-on-plateau
// schedule and early stopping. The best iterate seen is returned.

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "raylift/error.hpp"

namespace raylift {

struct ParamGroup {
  int begin = 0;
  int size = 0;
  double lr = 1e-3;
};

struct OptimConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double plateau_factor = 0.9;
  int plateau_patience = 10;
  // Relative improvement needed to reset the plateau counter.
  double plateau_threshold = 1e-4;
  int early_stop_patience = 100;
  double early_stop_delta = 1e-6;
  int max_iters = 5000;
  bool record_trace = false;

  void Validate() const {
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "plateau factor must lie in (0, 1)");
    }
    if (plateau_patience < 1 || early_stop_patience < 1) {
      throw Error(ErrorCode::kInvalidArgument, "patience values must be >= 1");
    }
    if (max_iters < 0) throw Error(ErrorCode::kInvalidArgument, "max_iters must be >= 0");
  }
};

struct MinimizeResult {
  Eigen::VectorXd params;
  double loss = 0.0;
  int iterations = 0;
  bool early_stopped = false;
  std::vector<double> loss_trace;             // per iteration, when recorded
  std::vector<std::vector<double>> lr_trace;  // lr of each group used at each step
};

struct NoProjection {
  void operator()(Eigen::VectorXd&) const {}
};

// objective(x, &grad) -> loss. project(x) is applied after every update.
template <typename Objective, typename Projection = NoProjection>
MinimizeResult minimize(Objective&& objective, Eigen::VectorXd x,
                        std::span<const ParamGroup> groups, const OptimConfig& cfg,
                        Projection&& project = {}) {
  cfg.Validate();
  for (const auto& g : groups) {
    if (g.begin < 0 || g.size < 0 || g.begin + g.size > x.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "parameter group out of range");
    }
  }
  const Eigen::Index n = x.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  double loss = objective(x, &grad);
  if (!std::isfinite(loss) || !grad.allFinite()) {
    throw Error(ErrorCode::kNonFiniteLoss, "objective is not finite at the initial point");
  }

  std::vector<double> lrs;
  for (const auto& g : groups) lrs.push_back(g.lr);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);

  MinimizeResult res;
  res.params = x;
  res.loss = loss;
  double stop_best = loss;
  int stop_count = 0;
  double plateau_best = loss;
  int plateau_count = 0;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(cfg.beta1, it);
    const double bc2 = 1.0 - std::pow(cfg.beta2, it);
    for (size_t k = 0; k < groups.size(); ++k) {
      const auto& g = groups[k];
      for (int i = g.begin; i < g.begin + g.size; ++i) {
        x(i) -= lrs[k] * (m(i) / bc1) / (std::sqrt(v(i) / bc2) + cfg.eps);
      }
    }
    project(x);
    if (cfg.record_trace) res.lr_trace.push_back(lrs);

    loss = objective(x, &grad);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw Error(ErrorCode::kNonFiniteLoss, "objective became non-finite at iteration " +
                                                 std::to_string(it));
    }
    if (cfg.record_trace) res.loss_trace.push_back(loss);
    res.iterations = it;
    if (loss < res.loss) {
      res.loss = loss;
      res.params = x;
    }

    if (loss < plateau_best - std::abs(plateau_best) * cfg.plateau_threshold) {
      plateau_best = loss;
      plateau_count = 0;
    } else if (++plateau_count >= cfg.plateau_patience) {
      for (double& lr : lrs) lr *= cfg.plateau_factor;
      plateau_count = 0;
    }

    if (loss < stop_best - cfg.early_stop_delta) {
      stop_best = loss;
      stop_count = 0;
    } else if (++stop_count >= cfg.early_stop_patience) {
      res.early_stopped = true;
      break;
    }
  }
  return res;
}

}  // namespace raylift
