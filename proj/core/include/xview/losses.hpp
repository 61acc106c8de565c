#pragma once

#include "xview/frames.hpp"
#include "xview/grid.hpp"

#include <span>
#include <vector>

namespace xview {

/// Per-pixel confidence, clamped into [kConfClamp, 1 - kConfClamp] on use.
struct ConfMap {
  Grid<double> conf;
};

inline constexpr double kConfClamp = 1e-7;
inline constexpr double kDepthWeightFloor = 0.1;
inline constexpr double kScaleFloor = 1e-6;
inline constexpr double kRatioEpsilon = 1e-9;

struct LossWeights {
  double lambda_n = 1.0;
  double lambda_c = 0.05;
  double lambda_p = 0.1;
};

struct LossComponents {
  double geo = 0.0;
  double norm = 0.0;
  double conf = 0.0;
  double cam = 0.0;
};

/// Global scale s > 0 minimizing sum_i w_i |s * pred_i - gt_i| over every
/// coordinate of every jointly valid pixel: the weighted median of
/// gt/pred ratios with weights w_i |pred_i|. `weights` is per pixel.
double optimal_scale(const PointMap& pred, const PointMap& gt, std::span<const double> weights);

/// 1 / max(z_gt, 0.1) on valid gt pixels, 0 elsewhere.
std::vector<double> depth_weights(const PointMap& gt);

struct GeoLoss {
  double value = 0.0;
  double scale = 1.0;
  Grid<Vec3> grad;  // d value / d pred.points at fixed scale
};

GeoLoss loss_geo(const PointMap& pred, const PointMap& gt);

/// Unit normals from forward differences; last row and column invalid.
PointMap normals_from_pointmap(const PointMap& P);

double loss_norm(const PointMap& pred, const PointMap& gt);

double loss_conf(const ConfMap& conf, const PointMap& pred, const PointMap& gt, double eps = 0.1);

struct CamLoss {
  double value = 0.0;
  double rot = 0.0;    // mean rotation term
  double trans = 0.0;  // mean translation term
  double scale = 1.0;  // translation scale correction
  std::vector<Vec3> grad_t;  // d value / d pred[k].t
};

inline double huber(double r, double delta) {
  return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
}

CamLoss loss_cam(std::span<const Pose> pred, std::span<const Pose> gt, double huber_delta = 0.1);

double total_loss(const LossComponents& c, const LossWeights& w, bool warmup_active);

}  // namespace xview
