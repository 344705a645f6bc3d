#include "hcl/spectral.hpp"

#include "hcl/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hcl {

namespace {

/// Clamped eigenvalues of the Hermitian symbol, ascending, with vectors.
void eigen_of_symbol(const MatC& vhat, const SpectralParams& p, Vec& evals,
                     MatC& evecs, std::span<const double> theta) {
  Eigen::SelfAdjointEigenSolver<MatC> es(vhat);
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
  for (long i = 0; i < evals.size(); ++i) {
    if (evals(i) < -p.e3_clamp) {
      std::ostringstream msg;
      msg << "E3 violated: eigenvalue " << evals(i) << " of Vhat at theta = (";
      for (size_t a = 0; a < theta.size(); ++a)
        msg << (a ? ", " : "") << theta[a];
      msg << ")";
      throw std::runtime_error(msg.str());
    }
    evals(i) = std::max(evals(i), 0.0);
  }
}

/// Sorted band values only (for finite-difference derivatives).
Vec band_values(const InteractionKernel& k, std::span<const double> theta,
                const SpectralParams& p) {
  Vec evals;
  MatC evecs;
  eigen_of_symbol(symbol_at(k, theta), p, evals, evecs, theta);
  return evals.cwiseSqrt();
}

}  // namespace

double SpectralTable::max_omega() const {
  double m = 0.0;
  for (const auto& e : entries)
    if (!e.bands.empty()) m = std::max(m, e.bands.back().omega);
  return m;
}

double SpectralTable::group_velocity() const {
  // ascending sqrt-eigenvalue curves are Lipschitz; a grid-scale central
  // difference along each axis bounds |grad omega| well enough for the guard
  double gv = 0.0;
  int d = grid.dim();
  std::vector<int> idx(d);
  for (long f = 0; f < grid.size(); ++f) {
    grid.shape.unflatten(f, idx);
    for (int a = 0; a < d; ++a) {
      int N = grid.shape.extent[a];
      std::vector<int> ip = idx, im = idx;
      ip[a] = (idx[a] + 1) % N;
      im[a] = (idx[a] - 1 + N) % N;
      const auto& bp = entries[grid.shape.flat(ip)].bands;
      const auto& bm = entries[grid.shape.flat(im)].bands;
      double h = 2.0 * (2.0 * std::numbers::pi / N);
      size_t nb = std::min(bp.size(), bm.size());
      for (size_t b = 0; b < nb; ++b)
        gv = std::max(gv, std::abs(bp[b].omega - bm[b].omega) / h);
    }
  }
  return gv;
}

SpectralTable build_spectral_table(const InteractionKernel& kernel,
                                   const TorusGrid& grid,
                                   const SpectralParams& params, int workers) {
  if (!kernel.check_symmetry())
    throw std::invalid_argument("build_spectral_table: kernel violates E2");
  if (grid.dim() != kernel.d)
    throw std::invalid_argument("build_spectral_table: grid/kernel dimension");

  SpectralTable table;
  table.kernel = kernel;
  table.grid = grid;
  table.params = params;
  table.entries.resize(grid.size());

  const int n = kernel.n;
  std::vector<std::string> failure(1);
  parallel_for(
      grid.size(),
      [&](long f) {
        auto theta = grid.point(f);
        SpectralEntry& e = table.entries[f];
        e.vhat = symbol_at(kernel, theta);
        Vec evals;
        MatC evecs;
        try {
          eigen_of_symbol(e.vhat, params, evals, evecs, theta);
        } catch (const std::exception& ex) {
          if (failure[0].empty()) failure[0] = ex.what();
          return;
        }
        Vec omegas = evals.cwiseSqrt();
        double merge = params.band_merge_rel * (1.0 + omegas.maxCoeff());

        e.omega = MatC::Zero(n, n);
        int i = 0;
        while (i < n) {
          int j = i;
          while (j + 1 < n && omegas(j + 1) - omegas(i) < merge) ++j;
          Band band;
          band.omega = omegas.segment(i, j - i + 1).mean();
          band.multiplicity = j - i + 1;
          band.projection = MatC::Zero(n, n);
          for (int c = i; c <= j; ++c)
            band.projection += evecs.col(c) * evecs.col(c).adjoint();
          e.omega += band.omega * band.projection;
          e.bands.push_back(std::move(band));
          i = j + 1;
        }

        // sign(d omega / d theta_1) per band
        if (kernel.is_nn()) {
          double s = std::sin(theta[0]);
          int sg = std::abs(s) < 1e-12 ? 0 : (s > 0 ? 1 : -1);
          for (auto& b : e.bands) b.sign1 = sg;
        } else {
          auto tp = theta, tm = theta;
          double h = 2.0 * std::numbers::pi / grid.shape.extent[0];
          tp[0] += h;
          tm[0] -= h;
          Vec wp = band_values(kernel, tp, params);
          Vec wm = band_values(kernel, tm, params);
          // match finite-difference values to bands through the ascending
          // eigenvalue index (valid away from crossings)
          int base = 0;
          for (auto& b : e.bands) {
            double dw =
                (wp.segment(base, b.multiplicity).mean() -
                 wm.segment(base, b.multiplicity).mean()) /
                (2.0 * h);
            b.sign1 = std::abs(dw) < params.acoustic_eps ? 0 : (dw > 0 ? 1 : -1);
            base += b.multiplicity;
          }
        }
      },
      workers);

  if (!failure[0].empty()) throw std::runtime_error(failure[0]);
  return table;
}

MatC matrix_function(const SpectralEntry& entry,
                     const std::function<double(double)>& f) {
  MatC out = MatC::Zero(entry.vhat.rows(), entry.vhat.cols());
  for (const auto& b : entry.bands) out += f(b.omega) * b.projection;
  return out;
}

MatC sin_omega_t_over_omega(const SpectralEntry& entry, double t) {
  return matrix_function(entry, [t](double w) {
    double x = w * t;
    return std::abs(x) < 1e-8 ? t * (1.0 - x * x / 6.0)
                              : std::sin(x) / w;
  });
}

MatC matrix_function_positive(const SpectralEntry& entry,
                              const std::function<double(double)>& f,
                              double acoustic_eps) {
  for (const auto& b : entry.bands)
    if (b.omega < acoustic_eps)
      throw std::runtime_error(
          "matrix_function_positive: band at an acoustic point, omega = " +
          std::to_string(b.omega));
  return matrix_function(entry, f);
}

}  // namespace hcl
