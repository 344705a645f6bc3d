#pragma once

#include "hcl/grid.hpp"

#include <string>

namespace hcl {

/// Displacement/velocity pair on a finite lattice box. Data is stored as
/// n x sites matrices in the box's flat row-major site order. Half flavor
/// fields vanish on the boundary layer z1 = 0.
struct FieldState {
  Box box;
  int n = 1;
  Mat u;  // n x sites
  Mat v;  // n x sites

  FieldState() = default;
  FieldState(Box b, int n_)
      : box(std::move(b)),
        n(n_),
        u(Mat::Zero(n_, box.sites())),
        v(Mat::Zero(n_, box.sites())) {}

  long sites() const { return box.sites(); }

  /// Largest |entry| on the z1 = 0 layer (meaningful for half flavor).
  double boundary_abs_max() const;
  /// Zeroes the z1 = 0 layer.
  void clamp_boundary();
};

/// <Y, Psi>_+ : sum over z1 >= 1 of u.u' + v.v'. Both fields must share the
/// box; for full (doubled) boxes the sum runs over the half region
/// 1 <= z1 <= L1/2 - 1.
double inner_half(const FieldState& a, const FieldState& b);

/// Snapshot: flat binary (header: d, n, L per axis, flavor; payload:
/// row-major doubles, u then v) plus a JSON sidecar path.json.
void save_field(const FieldState& x, const std::string& path);
FieldState load_field(const std::string& path);

/// CSV export of the 1-d slice along axis 1 through bar z = 0:
/// z1, u_1..u_n, v_1..v_n.
std::string field_slice_csv(const FieldState& x);

}  // namespace hcl
