#include "hcl/dynamics.hpp"

#include "hcl/fft.hpp"
#include "hcl/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace hcl {

namespace {

void require_grid_match(const SpectralTable& table, const Box& box,
                        const char* who) {
  if (table.grid.offset || table.grid.shape.extent != box.shape.extent)
    throw std::invalid_argument(std::string(who) +
                                ": table grid does not match the box");
}

/// Forward DFT of every component field of (u, v); returns 2n rows x sites.
Eigen::MatrixXcd field_to_fourier(const FieldState& x) {
  const long s = x.sites();
  Eigen::MatrixXcd hat(2 * x.n, s);
  VecC buf(s);
  for (int c = 0; c < 2 * x.n; ++c) {
    const Mat& src = c < x.n ? x.u : x.v;
    buf = src.row(c % x.n).transpose().cast<Complex>();
    dft_forward(x.box.shape, buf);
    hat.row(c) = buf.transpose();
  }
  return hat;
}

FieldState fourier_to_field(Eigen::MatrixXcd hat, const Box& box, int n) {
  FieldState x(box, n);
  VecC buf(box.sites());
  for (int c = 0; c < 2 * n; ++c) {
    buf = hat.row(c).transpose();
    dft_inverse(box.shape, buf);
    Mat& dst = c < n ? x.u : x.v;
    dst.row(c % n) = buf.real().transpose();
  }
  return x;
}

/// (V * u)(z) with periodic wrap, direct sum over the kernel support.
Mat kernel_convolve(const InteractionKernel& kernel, const Box& box,
                    const Mat& u) {
  Mat out = Mat::Zero(u.rows(), u.cols());
  std::vector<int> idx(box.dim()), shifted(box.dim());
  for (const auto& [w, V] : kernel.table) {
    for (long s = 0; s < box.sites(); ++s) {
      box.shape.unflatten(s, idx);
      for (int a = 0; a < box.dim(); ++a) shifted[a] = idx[a] - w[a];
      out.col(s) += V * u.col(box.shape.flat_wrapped(shifted));
    }
  }
  return out;
}

}  // namespace

MatC PropagatorSymbol::full(long flat) const {
  MatC m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = cos_block[flat];
  m.topRightCorner(n, n) = sinc_block[flat];
  m.bottomLeftCorner(n, n) = osin_block[flat];
  m.bottomRightCorner(n, n) = cos_block[flat];
  return m;
}

PropagatorSymbol propagator_hat(const SpectralTable& table, double t,
                                int workers) {
  PropagatorSymbol p;
  p.t = t;
  p.n = table.n();
  long m = table.grid.size();
  p.cos_block.resize(m);
  p.sinc_block.resize(m);
  p.osin_block.resize(m);
  parallel_for(
      m,
      [&](long f) {
        const SpectralEntry& e = table.at(f);
        p.cos_block[f] =
            matrix_function(e, [t](double w) { return std::cos(w * t); });
        p.sinc_block[f] = sin_omega_t_over_omega(e, t);
        p.osin_block[f] =
            matrix_function(e, [t](double w) { return -w * std::sin(w * t); });
      },
      workers);
  return p;
}

GreenFunction green_function(const SpectralTable& table, double t,
                             int workers) {
  if (table.grid.offset)
    throw std::invalid_argument("green_function: needs the plain DFT grid");
  GreenFunction G;
  G.box = Box{table.grid.shape.extent, false};
  G.n = table.n();
  G.t = t;
  PropagatorSymbol p = propagator_hat(table, t, workers);

  const long s = G.box.sites();
  const int m = 2 * G.n;
  G.g.assign(s, Mat::Zero(m, m));
  double max_imag = 0.0, max_abs = 0.0;
  VecC buf(s);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      for (long f = 0; f < s; ++f) buf(f) = p.full(f)(r, c);
      dft_inverse(G.box.shape, buf);
      for (long f = 0; f < s; ++f) {
        G.g[f](r, c) = buf(f).real();
        max_imag = std::max(max_imag, std::abs(buf(f).imag()));
        max_abs = std::max(max_abs, std::abs(buf(f).real()));
      }
    }
  }
  if (max_imag > 1e-10 * (1.0 + max_abs))
    throw std::runtime_error("green_function: imaginary residue " +
                             std::to_string(max_imag));
  return G;
}

FieldState evolve_full(const FieldState& x0, const SpectralTable& table,
                       double t, int workers) {
  require_grid_match(table, x0.box, "evolve_full");
  const int n = x0.n;
  PropagatorSymbol p = propagator_hat(table, t, workers);
  Eigen::MatrixXcd hat = field_to_fourier(x0);
  parallel_for(
      x0.sites(),
      [&](long f) {
        VecC uh = hat.col(f).head(n);
        VecC vh = hat.col(f).tail(n);
        hat.col(f).head(n) = p.cos_block[f] * uh + p.sinc_block[f] * vh;
        hat.col(f).tail(n) = p.osin_block[f] * uh + p.cos_block[f] * vh;
      },
      workers);
  return fourier_to_field(std::move(hat), x0.box, n);
}

FieldState odd_extension(const FieldState& y) {
  if (!y.box.half) throw std::invalid_argument("odd_extension: need half field");
  if (y.boundary_abs_max() > 1e-12)
    throw std::invalid_argument("odd_extension: field nonzero at z1 = 0");
  Box full = y.box.doubled();
  FieldState x(full, y.n);
  const int L1 = y.box.shape.extent[0];
  std::vector<int> idx(full.dim());
  for (long s = 0; s < full.sites(); ++s) {
    full.shape.unflatten(s, idx);
    int c = idx[0];
    if (c < L1) {
      idx[0] = c;
      long src = y.box.shape.flat(idx);
      x.u.col(s) = y.u.col(src);
      x.v.col(s) = y.v.col(src);
    } else if (c > L1) {
      idx[0] = 2 * L1 - c;
      long src = y.box.shape.flat(idx);
      x.u.col(s) = -y.u.col(src);
      x.v.col(s) = -y.v.col(src);
    }  // c == L1: mirror fixed point, stays zero
  }
  return x;
}

FieldState restrict_half(const FieldState& x) {
  if (x.box.half) throw std::invalid_argument("restrict_half: full field expected");
  std::vector<int> half_ext = x.box.shape.extent;
  half_ext[0] /= 2;
  FieldState y(Box{half_ext, true}, x.n);
  std::vector<int> idx(x.box.dim());
  for (long s = 0; s < y.sites(); ++s) {
    y.box.shape.unflatten(s, idx);
    long src = x.box.shape.flat(idx);  // same coordinates, z1 < L1
    y.u.col(s) = x.u.col(src);
    y.v.col(s) = x.v.col(src);
  }
  return y;
}

FieldState evolve_half(const FieldState& y0, const SpectralTable& table,
                       double t, HalfMethod method, int workers) {
  if (!y0.box.half) throw std::invalid_argument("evolve_half: need half field");
  if (y0.boundary_abs_max() > 1e-12)
    throw std::invalid_argument("evolve_half: field nonzero at z1 = 0");
  Box doubled = y0.box.doubled();
  require_grid_match(table, doubled, "evolve_half");

  if (method == HalfMethod::kOddExtension)
    return evolve_half_prepared(propagator_hat(table, t, workers), y0);

  // image method: direct summation against the box Green function
  GreenFunction G = green_function(table, t, workers);
  FieldState out(y0.box, y0.n);
  const int n = y0.n;
  const Shape& half_shape = y0.box.shape;
  std::vector<Vec> stacked(y0.sites(), Vec(2 * n));
  for (long s = 0; s < y0.sites(); ++s) {
    stacked[s].head(n) = y0.u.col(s);
    stacked[s].tail(n) = y0.v.col(s);
  }
  parallel_for(
      y0.sites(),
      [&](long sz) {
        std::vector<int> z(y0.box.dim()), zp(y0.box.dim()),
            dz(y0.box.dim());
        half_shape.unflatten(sz, z);
        Vec acc = Vec::Zero(2 * n);
        for (long szp = 0; szp < y0.sites(); ++szp) {
          half_shape.unflatten(szp, zp);
          if (zp[0] == 0) continue;
          for (int a = 0; a < y0.box.dim(); ++a) dz[a] = z[a] - zp[a];
          const Mat& direct = G.at(dz);
          dz[0] = z[0] + zp[0];  // z - ~z', wrapped on the doubled box
          const Mat& image = G.at(dz);
          acc += (direct - image) * stacked[szp];
        }
        out.u.col(sz) = acc.head(n);
        out.v.col(sz) = acc.tail(n);
      },
      workers);
  return out;
}

FieldState evolve_half_prepared(const PropagatorSymbol& p,
                                const FieldState& y0) {
  FieldState star = odd_extension(y0);
  const int n = y0.n;
  Eigen::MatrixXcd hat = field_to_fourier(star);
  for (long f = 0; f < star.sites(); ++f) {
    VecC uh = hat.col(f).head(n);
    VecC vh = hat.col(f).tail(n);
    hat.col(f).head(n) = p.cos_block[f] * uh + p.sinc_block[f] * vh;
    hat.col(f).tail(n) = p.osin_block[f] * uh + p.cos_block[f] * vh;
  }
  return restrict_half(fourier_to_field(std::move(hat), star.box, n));
}

FieldState adjoint_evolve(const FieldState& psi, const SpectralTable& table,
                          double t, int workers) {
  if (!psi.box.half)
    throw std::invalid_argument("adjoint_evolve: need half test function");
  FieldState star = odd_extension(psi);
  require_grid_match(table, star.box, "adjoint_evolve");
  const int n = psi.n;
  PropagatorSymbol p = propagator_hat(table, t, workers);
  Eigen::MatrixXcd hat = field_to_fourier(star);
  // Ghat_t(theta)^* swaps the off-diagonal blocks (all blocks Hermitian)
  parallel_for(
      star.sites(),
      [&](long f) {
        VecC uh = hat.col(f).head(n);
        VecC vh = hat.col(f).tail(n);
        hat.col(f).head(n) = p.cos_block[f] * uh + p.osin_block[f] * vh;
        hat.col(f).tail(n) = p.sinc_block[f] * uh + p.cos_block[f] * vh;
      },
      workers);
  return fourier_to_field(std::move(hat), star.box, n);
}

double energy(const FieldState& x, const InteractionKernel& kernel) {
  Mat vu = kernel_convolve(kernel, x.box, x.u);
  double pot = (vu.array() * x.u.array()).sum();
  double kin = x.v.squaredNorm();
  return 0.5 * (kin + pot);
}

double weighted_norm(const FieldState& y, double alpha) {
  const Shape& sh = y.box.shape;
  std::vector<int> idx(y.box.dim());
  double sum = 0.0;
  for (long s = 0; s < y.sites(); ++s) {
    sh.unflatten(s, idx);
    double zsq = 0.0;
    for (int a = 0; a < y.box.dim(); ++a) {
      double c = (a == 0 && y.box.half) ? idx[a] : sh.signed_coord(idx[a], a);
      zsq += c * c;
    }
    double w = std::pow(1.0 + zsq, alpha);
    sum += w * (y.u.col(s).squaredNorm() + y.v.col(s).squaredNorm());
  }
  return std::sqrt(sum);
}

FieldState timestep_oracle(const FieldState& x0,
                           const InteractionKernel& kernel, double t,
                           double dt) {
  double norm_bound = 0.0;
  for (const auto& [z, V] : kernel.table) norm_bound += V.norm();
  double omega_max = std::sqrt(norm_bound);
  if (dt * omega_max >= 0.5)
    throw std::invalid_argument("timestep_oracle: dt violates stability");

  long steps = std::lround(t / dt);
  FieldState x = x0;
  Mat a = -kernel_convolve(kernel, x.box, x.u);
  for (long k = 0; k < steps; ++k) {
    x.u += dt * x.v + (0.5 * dt * dt) * a;
    Mat a_new = -kernel_convolve(kernel, x.box, x.u);
    x.v += (0.5 * dt) * (a + a_new);
    a = std::move(a_new);
  }
  return x;
}

}  // namespace hcl
