#pragma once

#include "hcl/types.hpp"

#include <cassert>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hcl {

/// Row-major multi-index bookkeeping shared by torus grids and boxes.
struct Shape {
  std::vector<int> extent;

  int dim() const { return static_cast<int>(extent.size()); }

  long size() const {
    long s = 1;
    for (int e : extent) s *= e;
    return s;
  }

  /// Flat index of a (possibly out-of-range) multi-index, with periodic wrap.
  long flat_wrapped(std::span<const int> idx) const {
    long f = 0;
    for (int a = 0; a < dim(); ++a) {
      int c = idx[a] % extent[a];
      if (c < 0) c += extent[a];
      f = f * extent[a] + c;
    }
    return f;
  }

  long flat(std::span<const int> idx) const {
    long f = 0;
    for (int a = 0; a < dim(); ++a) {
      assert(idx[a] >= 0 && idx[a] < extent[a]);
      f = f * extent[a] + idx[a];
    }
    return f;
  }

  void unflatten(long f, std::span<int> idx) const {
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(f % extent[a]);
      f /= extent[a];
    }
  }

  /// Signed representative of an axis coordinate in [-extent/2, extent/2).
  int signed_coord(int c, int axis) const {
    int e = extent[axis];
    return c >= (e + 1) / 2 ? c - e : c;
  }

  bool operator==(const Shape&) const = default;
};

/// Uniform discretization of the torus [0, 2pi)^d. With the half-cell offset
/// on, theta_k = 2pi (k + 1/2) / N and theta = 0 is never sampled; the nodes
/// are then midpoints of the cells [2pi k/N, 2pi (k+1)/N], so sums over the
/// grid are midpoint-rule quadratures.
struct TorusGrid {
  Shape shape;
  bool offset = false;

  TorusGrid() = default;
  TorusGrid(int d, int points_per_axis, bool offset_ = false)
      : shape{std::vector<int>(d, points_per_axis)}, offset(offset_) {
    if (points_per_axis % 2 != 0)
      throw std::invalid_argument("TorusGrid: points per axis must be even");
  }
  TorusGrid(std::vector<int> extents, bool offset_ = false)
      : shape{std::move(extents)}, offset(offset_) {}

  int dim() const { return shape.dim(); }
  long size() const { return shape.size(); }

  double theta(int k, int axis) const {
    return 2.0 * std::numbers::pi * (k + (offset ? 0.5 : 0.0)) /
           shape.extent[axis];
  }

  std::vector<double> point(long flat) const {
    std::vector<int> idx(dim());
    shape.unflatten(flat, idx);
    std::vector<double> th(dim());
    for (int a = 0; a < dim(); ++a) th[a] = theta(idx[a], a);
    return th;
  }
};

/// Finite lattice box. Full flavor: sites 0..L_a-1 per axis, periodic wrap.
/// Half flavor: axis 1 runs over the slab z1 = 0..L1-1 next to the boundary;
/// the remaining axes stay periodic.
struct Box {
  Shape shape;
  bool half = false;

  Box() = default;
  Box(std::vector<int> extents, bool half_ = false)
      : shape{std::move(extents)}, half(half_) {}

  int dim() const { return shape.dim(); }
  long sites() const { return shape.size(); }

  /// Periodic box of extent 2*L1 along axis 1 carrying the odd extension.
  Box doubled() const {
    if (!half) throw std::logic_error("Box::doubled: full box");
    Box b{shape.extent, false};
    b.shape.extent[0] *= 2;
    return b;
  }

  /// Horizon guard: evolution to t_max stays exact (no wrap into the probe
  /// region) only while L1 > 2 (gamma_v t_max + R_obs + r0).
  bool horizon_ok(double t_max, double group_velocity, double r_obs,
                  double r0) const {
    return shape.extent[0] > 2.0 * (group_velocity * t_max + r_obs + r0);
  }

  bool operator==(const Box&) const = default;
};

}  // namespace hcl
