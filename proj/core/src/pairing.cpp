#include "xview/pairing.hpp"

#include "xview/error.hpp"

#include <algorithm>
#include <cmath>

namespace xview {

VoxelSet voxelize(std::span<const Vec3> points, double cell) {
  if (!(cell > 0.0)) throw Error(ErrorKind::configuration, "voxel cell size must be positive");
  VoxelSet out;
  out.cell = cell;
  out.occupied.reserve(points.size());
  for (const Vec3& p : points) {
    out.occupied.push_back({static_cast<std::int64_t>(std::floor(p.x() / cell)),
                            static_cast<std::int64_t>(std::floor(p.y() / cell)),
                            static_cast<std::int64_t>(std::floor(p.z() / cell))});
  }
  std::sort(out.occupied.begin(), out.occupied.end());
  out.occupied.erase(std::unique(out.occupied.begin(), out.occupied.end()), out.occupied.end());
  return out;
}

std::size_t overlap_score(const VoxelSet& a, const VoxelSet& b) {
  if (a.cell != b.cell) {
    throw Error(ErrorKind::configuration, "overlap_score: voxel sets use different cell sizes");
  }
  std::size_t n = 0;
  auto i = a.occupied.begin();
  auto j = b.occupied.begin();
  while (i != a.occupied.end() && j != b.occupied.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double overlap_iou(const VoxelSet& a, const VoxelSet& b) {
  const std::size_t inter = overlap_score(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<TriViewTuple> select_tuples(const PairingViews& views, std::size_t k, double cell,
                                        PairScore score) {
  const int ns = static_cast<int>(views.satellite.size());
  const int nu = static_cast<int>(views.uav.size());
  const int ng = static_cast<int>(views.ground.size());
  if (ns < 2 || nu < 2 || ng < 2) {
    throw Error(ErrorKind::structural, "select_tuples: need at least two views per modality");
  }

  // Flatten views: satellites, then UAVs, then ground.
  std::vector<VoxelSet> voxels;
  for (const auto* list : {&views.satellite, &views.uav, &views.ground}) {
    for (const auto& cloud : *list) voxels.push_back(voxelize(cloud, cell));
  }
  const int n = static_cast<int>(voxels.size());
  std::vector<double> pair(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double s = score == PairScore::iou
                           ? overlap_iou(voxels[a], voxels[b])
                           : static_cast<double>(overlap_score(voxels[a], voxels[b]));
      pair[a * n + b] = pair[b * n + a] = s;
    }
  }

  std::vector<TriViewTuple> out;
  for (int s0 = 0; s0 < ns; ++s0)
    for (int s1 = s0 + 1; s1 < ns; ++s1)
      for (int u0 = 0; u0 < nu; ++u0)
        for (int u1 = u0 + 1; u1 < nu; ++u1)
          for (int g0 = 0; g0 < ng; ++g0)
            for (int g1 = g0 + 1; g1 < ng; ++g1) {
              const int flat[6] = {s0, s1, ns + u0, ns + u1, ns + nu + g0, ns + nu + g1};
              double total = 0.0;
              double lowest = 0.0;
              bool ok = true;
              for (int a = 0; a < 6 && ok; ++a) {
                for (int b = a + 1; b < 6; ++b) {
                  const double s = pair[flat[a] * n + flat[b]];
                  if (s <= 0.0) {
                    ok = false;
                    break;
                  }
                  lowest = (a == 0 && b == 1) ? s : std::min(lowest, s);
                  total += s;
                }
              }
              if (!ok) continue;
              out.push_back({{s0, s1}, {u0, u1}, {g0, g1}, total, lowest});
            }

  std::stable_sort(out.begin(), out.end(), [](const TriViewTuple& a, const TriViewTuple& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.key() < b.key();
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace xview
