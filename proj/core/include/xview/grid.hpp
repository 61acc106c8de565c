#pragma once

#include "xview/error.hpp"
#include "xview/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xview {

/// Row-major H x W grid.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, const T& fill = T{})
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }

  T& operator()(int row, int col) { return data[index(row, col)]; }
  const T& operator()(int row, int col) const { return data[index(row, col)]; }

  bool same_shape(int h, int w) const { return height == h && width == w; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return height == other.height && width == other.width;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

using Mask = Grid<std::uint8_t>;

/// Per-pixel 3D points with a validity mask. Invalid entries never take part
/// in reductions.
struct PointMap {
  Grid<Vec3> points;
  Mask valid;

  PointMap() = default;
  PointMap(int h, int w) : points(h, w, Vec3::Zero()), valid(h, w, 0) {}

  int height() const { return points.height; }
  int width() const { return points.width; }
  std::size_t size() const { return points.size(); }
  bool is_valid(std::size_t i) const { return valid.data[i] != 0; }

  void check_shape() const {
    if (!points.same_shape(valid)) {
      throw Error(ErrorKind::structural, "point map and mask dimensions disagree");
    }
  }

  friend bool operator==(const PointMap& a, const PointMap& b) {
    return a.points.height == b.points.height && a.points.width == b.points.width &&
           a.valid == b.valid && a.points.data == b.points.data;
  }
};

/// Dense depth (metric or relative) with a validity mask. Valid values are
/// finite and strictly positive.
struct DepthGrid {
  Grid<double> values;
  Mask valid;

  DepthGrid() = default;
  DepthGrid(int h, int w) : values(h, w, 0.0), valid(h, w, 0) {}

  int height() const { return values.height; }
  int width() const { return values.width; }
  std::size_t size() const { return values.size(); }
  bool is_valid(std::size_t i) const { return valid.data[i] != 0; }

  friend bool operator==(const DepthGrid&, const DepthGrid&) = default;
};

}  // namespace xview
