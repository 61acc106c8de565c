#pragma once

#include "xview/geometry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace xview {

inline constexpr double kDefaultVoxelCell = 2.0;

using VoxelKey = std::array<std::int64_t, 3>;

/// Occupied cells of a point cloud, sorted and unique.
struct VoxelSet {
  double cell = kDefaultVoxelCell;
  std::vector<VoxelKey> occupied;

  std::size_t size() const { return occupied.size(); }
};

VoxelSet voxelize(std::span<const Vec3> points, double cell = kDefaultVoxelCell);

/// Number of shared cells. Throws ErrorKind::configuration on differing cells.
std::size_t overlap_score(const VoxelSet& a, const VoxelSet& b);

/// Intersection over union of the occupied cells.
double overlap_iou(const VoxelSet& a, const VoxelSet& b);

enum class PairScore { intersection, iou };

/// Candidate views of each modality, as world-frame point clouds.
struct PairingViews {
  std::vector<std::vector<Vec3>> satellite;
  std::vector<std::vector<Vec3>> uav;
  std::vector<std::vector<Vec3>> ground;
};

/// Chosen views: indices into the satellite, uav and ground lists, each
/// pair in increasing order.
struct TriViewTuple {
  std::array<int, 2> satellite{};
  std::array<int, 2> uav{};
  std::array<int, 2> ground{};
  double score = 0.0;
  /// Smallest of the 15 pairwise overlaps.
  double min_overlap = 0.0;

  std::array<int, 6> key() const {
    return {satellite[0], satellite[1], uav[0], uav[1], ground[0], ground[1]};
  }
};

/// Top-k six-view tuples whose 15 pairwise overlaps are all non-empty, scored
/// by the sum of the pairwise overlaps. Ties break on lexicographic indices.
std::vector<TriViewTuple> select_tuples(const PairingViews& views, std::size_t k,
                                        double cell = kDefaultVoxelCell,
                                        PairScore score = PairScore::intersection);

}  // namespace xview
