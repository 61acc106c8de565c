#pragma once

#include "xview/grid.hpp"

#include <span>

namespace xview {

inline constexpr double kDefaultPccMin = 0.9;

struct ScaleShift {
  double scale = 1.0;
  double shift = 0.0;
};

/// Least-squares (s, t) minimizing sum (s * rel + t - anchor)^2 over pixels
/// valid in both grids.
ScaleShift fit_scale_shift(const DepthGrid& rel, const DepthGrid& anchor);

/// Sample Pearson correlation over entries where `mask` is set (all entries
/// when `mask` is empty).
double pearson(std::span<const double> a, std::span<const double> b,
               std::span<const std::uint8_t> mask = {});

struct FusionResult {
  bool accepted = false;
  double pcc = 0.0;
  ScaleShift fit;
  DepthGrid fused;  // empty when rejected
};

/// Anchor `rel` to metric depth and keep it only if the anchor correlates
/// with the relative prediction at pcc >= pcc_min.
FusionResult fuse_and_filter(const DepthGrid& rel, const DepthGrid& anchor,
                             double pcc_min = kDefaultPccMin);

}  // namespace xview
