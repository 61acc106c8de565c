#pragma once

#include "xview/geometry.hpp"
#include "xview/grid.hpp"

#include <span>
#include <vector>

namespace xview {

/// A matched pixel pair between two views. Pixel coordinates follow the
/// image convention (u = column, v = row, integers at pixel centers).
struct Match {
  int view_a = 0;
  Vec2 pixel_a = Vec2::Zero();
  int view_b = 0;
  Vec2 pixel_b = Vec2::Zero();
};

enum class CorrespondenceSource { ground_truth, nearest_neighbor };

struct CorrespondenceSet {
  std::vector<Match> matches;
  CorrespondenceSource source = CorrespondenceSource::ground_truth;
};

/// How a view's point map depends on its pixel grid; selects the exact
/// interpolation rule for sub-pixel lookups.
enum class Projection { perspective, orthographic };

/// Point at a continuous pixel. Orthographic maps are interpolated
/// bilinearly in (x, y, z); perspective maps bilinearly in (x/z, y/z, 1/z),
/// which is exact on planar patches. Returns false if any of the (up to)
/// four neighbors is invalid or out of bounds.
bool sample_point(const PointMap& map, const Vec2& pixel, Projection proj, Vec3& out);

/// Least-squares similarity (or rigid, when `with_scale` is false) mapping
/// src onto dst. Throws ErrorKind::degenerate on collinear input.
Similarity umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale);

struct RegistrationOptions {
  int max_rounds = 50;
  double tolerance = 1e-8;
  bool with_scale = true;
};

struct RegistrationResult {
  /// Per-view transform from view-local coordinates into the reference frame.
  std::vector<Similarity> transforms;
  /// Views that took part (non-empty point maps reachable from the reference).
  std::vector<bool> active;
  int rounds = 0;
  double rms_residual = 0.0;
};

/// Register every active view into the frame of `reference`: spanning-tree
/// initialization followed by alternating per-view refits. Views with an
/// empty point map are skipped. Throws ErrorKind::structural listing the
/// unreachable views if the correspondence graph is disconnected.
RegistrationResult register_views(std::span<const PointMap> pointmaps,
                                  std::span<const Projection> projections,
                                  const CorrespondenceSet& corr, int reference,
                                  const RegistrationOptions& opt = {});

/// Closed-form least-squares rho of (x, y) = ((u, v) - principal) * rho.
double estimate_rho(std::span<const Vec2> xy, std::span<const Vec2> pixels, const Vec2& principal);

/// Same, reading every valid pixel of an orthographic point map.
double estimate_rho(const PointMap& sat_points, const Vec2& principal);

/// Mutual nearest neighbours between world-frame clouds of two views with a
/// distance cutoff. Each cloud is a point map already placed in world
/// coordinates.
CorrespondenceSet mutual_nn_correspondences(std::span<const PointMap> world_maps,
                                            double cutoff, int stride = 1);

}  // namespace xview

#include "xview/ortho.hpp"

#include <optional>

namespace xview {

struct ViewLocalization {
  int view = 0;
  Pose pose;  // in the reference tile frame
  TileLocation location;
};

struct LocalizationResult {
  double rho = 0.0;
  RegistrationResult registration;
  std::vector<ViewLocalization> cameras;  // perspective views only, in view order
};

/// Register all views with non-empty point maps into the satellite view
/// `reference`, estimate its rho from the registered tile points, and place
/// every perspective camera on that tile.
LocalizationResult localize_views(std::span<const PointMap> pointmaps,
                                  std::span<const Projection> projections,
                                  const CorrespondenceSet& corr, int reference,
                                  const RegistrationOptions& opt = {});

}  // namespace xview
