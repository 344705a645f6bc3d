#pragma once

#include "hcl/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>

namespace hcl {

/// Finitely supported interaction kernel z -> V(z), an n x n real matrix per
/// site within sup-norm radius R. Carries the nearest-neighbor family
/// parameters when built by build_nn_kernel, so downstream code can use the
/// analytic dispersion.
struct InteractionKernel {
  int d = 1;
  int n = 1;
  int radius = 0;
  std::map<LatticePoint, Mat> table;

  // set when the kernel is a nearest-neighbor family member
  std::optional<Vec> nn_gamma;
  std::optional<Vec> nn_mass;

  bool is_nn() const { return nn_gamma.has_value(); }

  const Mat* at(std::span<const int> z) const {
    auto it = table.find(LatticePoint(z.begin(), z.end()));
    return it == table.end() ? nullptr : &it->second;
  }

  /// E2 symmetry V_lk(-z) = V_kl(z), checked exactly on the stored table.
  bool check_symmetry(double tol = 0.0) const;
  /// E0 evenness in z1: V(z) = V(~z), checked exactly.
  bool check_even_in_z1(double tol = 0.0) const;
};

/// Nearest-neighbor crystal: V_kk(0) = 2 d gamma_k + m_k^2,
/// V_kk(+-e_i) = -gamma_k, diagonal across components. The diagonal entry
/// cancels the Laplacian row sum so that
/// Vhat_kk(theta) = 2 gamma_k sum_i (1 - cos theta_i) + m_k^2.
InteractionKernel build_nn_kernel(int d, int n, const Vec& gamma,
                                  const Vec& mass);

/// Fourier symbol Vhat(theta) = sum_z V(z) exp(i z . theta), hermitized.
MatC symbol_at(const InteractionKernel& kernel, std::span<const double> theta);

/// Analytic NN band value: sqrt(2 gamma_k sum_i (1-cos theta_i) + m_k^2).
double nn_dispersion(double gamma, double mass, std::span<const double> theta);

/// JSON (de)serialization of the kernel definition file
/// {d, n, entries: [{z: [...], matrix: [[...]]}]}; named families are
/// accepted as {family: "nearest-neighbor", d, n, gamma: [...], mass: [...]}.
std::string kernel_to_json(const InteractionKernel& kernel);
InteractionKernel kernel_from_json(const std::string& text);

}  // namespace hcl
