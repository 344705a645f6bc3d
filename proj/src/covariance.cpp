#include "hcl/covariance.hpp"

#include "hcl/fft.hpp"
#include "hcl/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hcl {

namespace {

/// The stacked 2n-vector (u, v) at one site.
Vec stacked_at(const FieldState& x, long s) {
  Vec out(2 * x.n);
  out.head(x.n) = x.u.col(s);
  out.tail(x.n) = x.v.col(s);
  return out;
}

/// Block-diagonal 2n x 2n symbol of a spec (cross blocks vanish).
MatC spec_symbol_full(const CovarianceSpec& spec,
                      std::span<const double> theta) {
  MatC q = MatC::Zero(2 * spec.n, 2 * spec.n);
  q.topLeftCorner(spec.n, spec.n) = spec.symbol(0, theta);
  q.bottomRightCorner(spec.n, spec.n) = spec.symbol(1, theta);
  return q;
}

}  // namespace

MatC c_matrix(const SpectralEntry& entry, double eps0) {
  const long n = entry.vhat.rows();
  MatC omega_inv = matrix_function_positive(
      entry, [](double w) { return 1.0 / w; }, eps0);
  MatC omega = matrix_function(entry, [](double w) { return w; });
  MatC c = MatC::Zero(2 * n, 2 * n);
  c.topRightCorner(n, n) = omega_inv;
  c.bottomLeftCorner(n, n) = -omega;
  return c;
}

Mat LimitCovariance::halfspace(std::span<const int> z,
                               std::span<const int> zp) const {
  const int d = grid.dim();
  std::vector<int> zt(z.begin(), z.end()), zpt(zp.begin(), zp.end());
  zt[0] = -zt[0];
  zpt[0] = -zpt[0];
  std::vector<int> dz(d);
  auto diff = [&](std::span<const int> a, std::span<const int> b) -> const Mat& {
    for (int i = 0; i < d; ++i) dz[i] = a[i] - b[i];
    return q_inf(dz);
  };
  return diff(z, zp) - diff(z, zpt) - diff(zt, zp) + diff(zt, zpt);
}

LimitCovariance limit_symbol(const CovarianceSpec& spec,
                             const SpectralTable& table, int workers) {
  if (!table.grid.offset)
    throw std::invalid_argument("limit_symbol: needs the offset grid");
  if (spec.n != table.n())
    throw std::invalid_argument("limit_symbol: component count mismatch");

  LimitCovariance lim;
  lim.grid = table.grid;
  lim.n = spec.n;
  const int n = spec.n;
  const long m = table.grid.size();
  lim.qhat_plus.resize(m);
  lim.qhat_minus.resize(m);

  parallel_for(
      m,
      [&](long f) {
        const SpectralEntry& e = table.at(f);
        std::vector<double> th = table.grid.point(f);
        MatC q0 = spec_symbol_full(spec, th);
        MatC c = c_matrix(e, table.params.acoustic_eps);
        MatC cqc = c * q0 * c.adjoint();
        MatC cq_qc = c * q0 - q0 * c.adjoint();
        MatC qp = MatC::Zero(2 * n, 2 * n);
        MatC qm = MatC::Zero(2 * n, 2 * n);
        MatC sandwich(2 * n, 2 * n);
        for (const Band& b : e.bands) {
          sandwich.setZero();
          sandwich.topLeftCorner(n, n) = b.projection;
          sandwich.bottomRightCorner(n, n) = b.projection;
          qp += 0.25 * (sandwich * (q0 + cqc) * sandwich);
          qm += Complex(0.0, 0.25 * b.sign1) * (sandwich * cq_qc * sandwich);
        }
        lim.qhat_plus[f] = qp;
        lim.qhat_minus[f] = qm;
      },
      workers);

  // position tables via the offset-grid inverse transform, entry by entry
  lim.qpos.assign(m, Mat::Zero(2 * n, 2 * n));
  lim.qpos_plus.assign(m, Mat::Zero(2 * n, 2 * n));
  double max_imag = 0.0, max_abs = 0.0;
  VecC buf(m);
  for (int which = 0; which < 2; ++which) {
    const auto& src = which == 0 ? lim.qhat_plus : lim.qhat_minus;
    for (int r = 0; r < 2 * n; ++r) {
      for (int c = 0; c < 2 * n; ++c) {
        for (long f = 0; f < m; ++f) buf(f) = src[f](r, c);
        dft_inverse_offset(table.grid.shape, buf);
        for (long f = 0; f < m; ++f) {
          double re = buf(f).real();
          max_imag = std::max(max_imag, std::abs(buf(f).imag()));
          max_abs = std::max(max_abs, std::abs(re));
          lim.qpos[f](r, c) += re;
          if (which == 0) lim.qpos_plus[f](r, c) = re;
        }
      }
    }
  }
  if (max_imag > 1e-9 * (1.0 + max_abs))
    throw std::runtime_error("limit_symbol: imaginary residue " +
                             std::to_string(max_imag));
  return lim;
}

Mat CovarianceField::pair_matrix(long p, long q) const {
  Mat m(2 * n, 2 * n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      m.block(i * n, j * n, n, n) = block(i, p, j, q);
  return m;
}

std::string CovarianceField::to_csv() const {
  std::ostringstream os;
  os << "p,q,i,j,k,l,value" << (stderrs.size() ? ",stderr" : "") << "\n";
  const long P = static_cast<long>(probes.size());
  for (long p = 0; p < P; ++p)
    for (long q = 0; q < P; ++q)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              long r = i * n * P + p * n + k;
              long c = j * n * P + q * n + l;
              os << p << ',' << q << ',' << i << ',' << j << ',' << k << ','
                 << l << ',' << values(r, c);
              if (stderrs.size()) os << ',' << stderrs(r, c);
              os << "\n";
            }
  return os.str();
}

CovarianceField empirical_covariance(const EnsembleAccumulator& acc) {
  if (acc.count < 2)
    throw std::invalid_argument("empirical_covariance: need >= 2 samples");
  CovarianceField f;
  f.probes = acc.probes;
  f.n = acc.n;
  f.provenance = Provenance::kEmpirical;
  f.sample_count = acc.count;
  const double m = static_cast<double>(acc.count);
  f.values = acc.sum2 / m;
  Mat var = (acc.sum2sq / m - f.values.cwiseProduct(f.values))
                .cwiseMax(0.0) / (m - 1.0);
  f.stderrs = var.cwiseSqrt();
  return f;
}

FieldState CovarianceOperator::apply(const FieldState& a) const {
  if (!a.box.half)
    throw std::invalid_argument("CovarianceOperator: need a half field");
  Box half = doubled_box;
  half.shape.extent[0] /= 2;
  half.half = true;
  if (a.box != half || a.n != n)
    throw std::invalid_argument("CovarianceOperator: box mismatch");

  const Shape& dsh = doubled_box.shape;
  const long ds = doubled_box.sites();
  const int L1 = a.box.shape.extent[0];
  const int d = a.box.dim();

  // pre-weight and place on the doubled box
  Eigen::MatrixXcd hat = Eigen::MatrixXcd::Zero(2 * n, ds);
  std::vector<int> idx(d);
  for (long s = 0; s < a.sites(); ++s) {
    a.box.shape.unflatten(s, idx);
    long dst = dsh.flat(idx);
    Vec val = stacked_at(a, s);
    if (image_structure) {
      hat.col(dst) += val.cast<Complex>();
      idx[0] = (2 * L1 - idx[0]) % (2 * L1);
      hat.col(dsh.flat(idx)) -= val.cast<Complex>();
    } else {
      hat.col(dst) = cutoff_zeta(idx[0], cutoff_a) * val.cast<Complex>();
    }
  }

  VecC buf(ds);
  for (int c = 0; c < 2 * n; ++c) {
    buf = hat.row(c).transpose();
    dft_forward(dsh, buf);
    hat.row(c) = buf.transpose();
  }
  for (long f = 0; f < ds; ++f) hat.col(f) = qhat[f] * hat.col(f);
  for (int c = 0; c < 2 * n; ++c) {
    buf = hat.row(c).transpose();
    dft_inverse(dsh, buf);
    hat.row(c) = buf.transpose();
  }

  FieldState out(a.box, n);
  for (long s = 0; s < a.sites(); ++s) {
    a.box.shape.unflatten(s, idx);
    VecC w = hat.col(dsh.flat(idx));
    if (image_structure) {
      int c0 = idx[0];
      idx[0] = (2 * L1 - c0) % (2 * L1);
      w -= hat.col(dsh.flat(idx));
      idx[0] = c0;
    } else {
      w *= cutoff_zeta(idx[0], cutoff_a);
    }
    out.u.col(s) = w.head(n).real();
    out.v.col(s) = w.tail(n).real();
  }
  out.clamp_boundary();
  return out;
}

CovarianceOperator make_cutoff_operator(const CovarianceSpec& spec,
                                        int cutoff_a, const Box& half_box) {
  if (!half_box.half)
    throw std::invalid_argument("make_cutoff_operator: need a half box");
  CovarianceOperator op;
  op.doubled_box = half_box.doubled();
  op.n = spec.n;
  op.image_structure = false;
  op.cutoff_a = cutoff_a;
  TorusGrid grid(op.doubled_box.shape.extent, false);
  const long m = grid.size();
  op.qhat.resize(m);
  for (long f = 0; f < m; ++f)
    op.qhat[f] = spec_symbol_full(spec, grid.point(f));
  return op;
}

CovarianceOperator make_limit_operator(const LimitCovariance& limit,
                                       const Box& half_box) {
  if (!half_box.half)
    throw std::invalid_argument("make_limit_operator: need a half box");
  CovarianceOperator op;
  op.doubled_box = half_box.doubled();
  op.n = limit.n;
  op.image_structure = true;
  if (limit.grid.shape.extent != op.doubled_box.shape.extent)
    throw std::invalid_argument(
        "make_limit_operator: limit table does not match the doubled box");
  // symbol on the plain DFT grid = forward transform of the position table
  const long m = limit.grid.size();
  const int dim2n = 2 * limit.n;
  op.qhat.assign(m, MatC::Zero(dim2n, dim2n));
  VecC buf(m);
  for (int r = 0; r < dim2n; ++r) {
    for (int c = 0; c < dim2n; ++c) {
      for (long f = 0; f < m; ++f) buf(f) = limit.qpos[f](r, c);
      dft_forward(limit.grid.shape, buf);
      for (long f = 0; f < m; ++f) op.qhat[f](r, c) = buf(f);
    }
  }
  return op;
}

namespace {

/// Q_t columns at one source point: D_nu(z) = Q_t^{., nu}(z, zp) for all z,
/// nu = 0..2n-1, as 2n half fields.
std::vector<FieldState> propagate_columns(const CovarianceOperator& q0,
                                          const GreenFunction& green,
                                          const PropagatorSymbol& p,
                                          std::span<const int> zp) {
  Box half = q0.doubled_box;
  half.shape.extent[0] /= 2;
  half.half = true;
  const int n = q0.n;
  const int d = half.dim();
  std::vector<FieldState> cols;
  cols.reserve(2 * n);
  std::vector<int> idx(d), dz(d);
  for (int nu = 0; nu < 2 * n; ++nu) {
    FieldState a(half, n);
    for (long s = 0; s < half.sites(); ++s) {
      half.shape.unflatten(s, idx);
      if (idx[0] == 0) continue;
      for (int ax = 0; ax < d; ++ax) dz[ax] = zp[ax] - idx[ax];
      Vec row = green.at(dz).row(nu).transpose();
      dz[0] = zp[0] + idx[0];  // zp - ~y on the doubled box
      row -= green.at(dz).row(nu).transpose();
      a.u.col(s) = row.head(n);
      a.v.col(s) = row.tail(n);
    }
    cols.push_back(evolve_half_prepared(p, q0.apply(a)));
  }
  return cols;
}

void check_size(const CovarianceOperator& q0) {
  if (q0.doubled_box.sites() > (1L << 20))
    throw std::invalid_argument(
        "propagate_covariance: doubled box exceeds 2^20 sites");
}

}  // namespace

CovarianceField propagate_covariance(const CovarianceOperator& q0,
                                     const SpectralTable& table_doubled,
                                     double t,
                                     const std::vector<LatticePoint>& probes,
                                     int workers) {
  check_size(q0);
  if (table_doubled.grid.offset ||
      table_doubled.grid.shape.extent != q0.doubled_box.shape.extent)
    throw std::invalid_argument(
        "propagate_covariance: table must live on the doubled plain grid");
  const int n = q0.n;
  const long P = static_cast<long>(probes.size());
  const int L1 = q0.doubled_box.shape.extent[0] / 2;
  Box half = q0.doubled_box;
  half.shape.extent[0] /= 2;
  half.half = true;
  for (const auto& zp : probes)
    if (zp[0] < 0 || zp[0] >= L1)
      throw std::out_of_range("propagate_covariance: probe outside half box");

  GreenFunction green = green_function(table_doubled, t, workers);
  PropagatorSymbol p = propagator_hat(table_doubled, t, workers);

  CovarianceField out;
  out.probes = probes;
  out.n = n;
  out.provenance = Provenance::kPropagatedExact;
  out.values = Mat::Zero(2 * n * P, 2 * n * P);

  parallel_for(
      P,
      [&](long q) {
        std::vector<FieldState> cols =
            propagate_columns(q0, green, p, probes[q]);
        for (int nu = 0; nu < 2 * n; ++nu) {
          int j = nu / n, l = nu % n;
          long col = j * n * P + q * n + l;
          for (long pr = 0; pr < P; ++pr) {
            long s = half.shape.flat_wrapped(probes[pr]);
            Vec d = stacked_at(cols[nu], s);
            for (int mu = 0; mu < 2 * n; ++mu) {
              int i = mu / n, k = mu % n;
              out.values(i * n * P + pr * n + k, col) = d(mu);
            }
          }
        }
      },
      workers);

  out.values = (0.5 * (out.values + out.values.transpose())).eval();
  return out;
}

std::vector<Mat> propagate_covariance_diagonal(
    const CovarianceOperator& q0, const SpectralTable& table_doubled,
    double t, int workers) {
  check_size(q0);
  if (table_doubled.grid.offset ||
      table_doubled.grid.shape.extent != q0.doubled_box.shape.extent)
    throw std::invalid_argument(
        "propagate_covariance_diagonal: table must live on the doubled grid");
  const int n = q0.n;
  Box half = q0.doubled_box;
  half.shape.extent[0] /= 2;
  half.half = true;

  GreenFunction green = green_function(table_doubled, t, workers);
  PropagatorSymbol p = propagator_hat(table_doubled, t, workers);

  std::vector<Mat> diag(half.sites(), Mat::Zero(2 * n, 2 * n));
  parallel_for(
      half.sites(),
      [&](long s) {
        std::vector<int> zp(half.dim());
        half.shape.unflatten(s, zp);
        if (zp[0] == 0) return;
        std::vector<FieldState> cols = propagate_columns(q0, green, p, zp);
        for (int nu = 0; nu < 2 * n; ++nu)
          diag[s].col(nu) = stacked_at(cols[nu], s);
        diag[s] = (0.5 * (diag[s] + diag[s].transpose())).eval();
      },
      workers);
  return diag;
}

DecompositionTerms decomposition_oracle(const CovarianceSpec& spec,
                                        int cutoff_a,
                                        const GreenFunction& green,
                                        std::span<const int> z,
                                        std::span<const int> zp) {
  if (!spec.finite_range())
    throw std::invalid_argument("decomposition_oracle: finite-range specs only");
  const int n = spec.n;
  const int d = green.box.dim();
  const Shape& sh = green.box.shape;
  const int r0 = spec.range;

  DecompositionTerms out;
  out.r_total = Mat::Zero(2 * n, 2 * n);
  out.r_plus = Mat::Zero(2 * n, 2 * n);
  out.r_minus = Mat::Zero(2 * n, 2 * n);
  out.r_rest = Mat::Zero(2 * n, 2 * n);

  // enumerate displacements w inside the range of q0
  std::vector<std::vector<int>> disps;
  {
    std::vector<int> w(d, -(r0 - 1));
    while (true) {
      disps.push_back(w);
      int a = d - 1;
      while (a >= 0 && ++w[a] >= r0) w[a--] = -(r0 - 1);
      if (a < 0) break;
    }
  }
  std::vector<Mat> q0w;
  q0w.reserve(disps.size());
  for (const auto& w : disps) {
    Mat q = Mat::Zero(2 * n, 2 * n);
    q.topLeftCorner(n, n) = spec.position(0, w);
    q.bottomRightCorner(n, n) = spec.position(1, w);
    q0w.push_back(q);
  }

  std::vector<int> y(d), ypr(d), dz(d);
  for (long sy = 0; sy < green.box.sites(); ++sy) {
    sh.unflatten(sy, y);
    int y1 = sh.signed_coord(y[0], 0);
    double zeta_y = cutoff_zeta(y1, cutoff_a);
    for (int a = 0; a < d; ++a) dz[a] = z[a] - y[a];
    const Mat& gz = green.at(dz);
    for (size_t wi = 0; wi < disps.size(); ++wi) {
      for (int a = 0; a < d; ++a) ypr[a] = y[a] - disps[wi][a];
      int yp1 = sh.signed_coord(((ypr[0] % sh.extent[0]) + sh.extent[0]) %
                                    sh.extent[0],
                                0);
      double zeta_yp = cutoff_zeta(yp1, cutoff_a);
      double sgn = yp1 > 0 ? 1.0 : (yp1 < 0 ? -1.0 : 0.0);
      for (int a = 0; a < d; ++a) dz[a] = zp[a] - ypr[a];
      Mat gzp_t = green.at(dz).transpose();
      Mat left = gz * q0w[wi];
      out.r_plus += 0.5 * left * gzp_t;
      out.r_minus += (0.5 * sgn) * left * gzp_t;
      out.r_total += (zeta_y * zeta_yp) * left * gzp_t;
    }
  }
  out.r_rest = out.r_total - out.r_plus - out.r_minus;
  return out;
}

double limit_quadratic_form(const LimitCovariance& lim,
                            const FieldState& psi) {
  if (!psi.box.half)
    throw std::invalid_argument("limit_quadratic_form: need a half field");
  const int d = psi.box.dim();
  std::vector<long> support;
  for (long s = 0; s < psi.sites(); ++s)
    if (psi.u.col(s).norm() + psi.v.col(s).norm() > 0.0) support.push_back(s);

  std::vector<int> z(d), zpr(d);
  double sum = 0.0;
  for (long sz : support) {
    psi.box.shape.unflatten(sz, z);
    Vec a = stacked_at(psi, sz);
    for (long szp : support) {
      psi.box.shape.unflatten(szp, zpr);
      Vec b = stacked_at(psi, szp);
      sum += a.dot(lim.halfspace(z, zpr) * b);
    }
  }
  return sum;
}

}  // namespace hcl
