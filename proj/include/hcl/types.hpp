#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace hcl {

using Mat = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Lattice site, stored with signed coordinates.
using LatticePoint = std::vector<int>;

/// Reflection z -> (-z1, z2, ..., zd).
inline LatticePoint reflect(LatticePoint z) {
  z[0] = -z[0];
  return z;
}

/// Half-space membership: z1 > 0 (the layer z1 = 0 is the boundary).
inline bool in_half_space(std::span<const int> z) { return z[0] > 0; }

inline double norm_sq(std::span<const int> z) {
  double s = 0.0;
  for (int c : z) s += static_cast<double>(c) * c;
  return s;
}

inline int sup_norm(std::span<const int> z) {
  int m = 0;
  for (int c : z) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace hcl
