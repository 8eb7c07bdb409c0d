// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dragkit/error.hpp"

namespace dragkit {

/// A real-valued point on the token grid. Cell (x, y) has its center at (x, y).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;

  double norm_squared() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm_squared()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

using Vec2 = Point2;

/// Integer grid cell.
struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(Cell, Cell) = default;
  Point2 center() const { return {static_cast<double>(x), static_cast<double>(y)}; }
};

/// Round-half-away-from-zero on both coordinates. Coordinates beyond any
/// plausible grid saturate so the result is still off-grid.
inline Cell round_to_cell(Point2 p) {
  static constexpr double limit = 1e9;
  auto conv = [](double v) {
    return static_cast<int>(std::round(std::clamp(v, -limit, limit)));
  };
  return {conv(p.x), conv(p.y)};
}

/// A handle/target control point pair. A pair with source == target is a
/// zero-drag anchor that pins content in place.
struct DragPair {
  Point2 source;
  Point2 target;

  Vec2 drag() const { return target - source; }
  bool is_anchor() const { return source == target; }
  friend constexpr bool operator==(const DragPair&, const DragPair&) = default;
};

/// Dense row-major grid of cells.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      fail(ErrorCode::ShapeMismatch,
           "grid dimensions must be positive, got " + std::to_string(width) + "x" +
               std::to_string(height));
    }
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(Cell c) const { return contains(c.x, c.y); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)),
            static_cast<int>(i / static_cast<std::size_t>(width_))};
  }

  T& operator()(int x, int y) { return cells_[index(x, y)]; }
  const T& operator()(int x, int y) const { return cells_[index(x, y)]; }
  T& operator[](Cell c) { return cells_[index(c.x, c.y)]; }
  const T& operator[](Cell c) const { return cells_[index(c.x, c.y)]; }

  std::vector<T>& data() { return cells_; }
  const std::vector<T>& data() const { return cells_; }

  template <class U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
};

/// Cell grid of {0,1} values.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
  BinaryMask() = default;

  bool test(int x, int y) const { return contains(x, y) && (*this)(x, y) != 0; }
  bool test(Cell c) const { return test(c.x, c.y); }
  void set(int x, int y, bool on = true) { (*this)(x, y) = on ? 1 : 0; }
  void set(Cell c, bool on = true) { set(c.x, c.y, on); }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data()) n += v != 0;
    return n;
  }
  bool empty() const { return count() == 0; }

  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (data()[i]) out.push_back(cell_at(i));
    return out;
  }

  static BinaryMask from_cells(int width, int height, const std::vector<Cell>& on) {
    BinaryMask m(width, height);
    for (auto c : on)
      if (m.contains(c)) m.set(c);
    return m;
  }

  /// True iff every set cell of *this is set in `other`.
  bool subset_of(const BinaryMask& other) const {
    if (!same_shape(other)) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (data()[i] && !other.data()[i]) return false;
    return true;
  }
};

/// Per-cell 2-vectors in token units.
using VectorField = Grid<Vec2>;

/// Per destination cell: the source cell it samples from, if any.
using Correspondence = Grid<std::optional<Cell>>;

}  // namespace dragkit
