#pragma once

#include "hcl/grid.hpp"

namespace hcl {

/// d-dimensional DFT on a Shape, applied axis by axis. Conventions follow
/// the symbol transform: forward computes
///   Xhat(theta_k) = sum_z X(z) exp(+i z . theta_k),  theta_k = 2 pi k / N,
/// and inverse is its exact inverse (1/N^d normalization included).
/// Data is a flat row-major array of Shape::size() complex values.
void dft_forward(const Shape& shape, VecC& data);
void dft_inverse(const Shape& shape, VecC& data);

/// Inverse transform onto the half-cell offset grid:
///   x(z) = N^{-d} sum_k exp(-i z . theta_k) F(theta_k),
///   theta_k = 2 pi (k + 1/2) / N.
/// The output is indexed by the signed representative of z per axis (stored
/// at the wrapped position); unlike the plain DFT it is antiperiodic over one
/// period, so only signed |z_a| <= N_a/2 - 1 entries are meaningful.
void dft_inverse_offset(const Shape& shape, VecC& data);

}  // namespace hcl
