#pragma once

#include "xview/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace xview {

/// Static 3D k-d tree with exact nearest-neighbour queries.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  struct Result {
    std::size_t index = 0;
    double distance = 0.0;
  };

  /// Exact nearest neighbour; ties resolve to the lowest point index.
  /// The tree must be non-empty.
  Result nearest(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, const Vec3& q, std::size_t& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace xview
