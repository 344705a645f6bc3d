#include "hcl/random_fields.hpp"

#include "hcl/fft.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace hcl {

NoiseKind noise_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseKind::kGaussian;
  if (s == "rademacher") return NoiseKind::kRademacher;
  if (s == "uniform") return NoiseKind::kUniform;
  throw std::invalid_argument("unknown noise law: " + s);
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kRademacher: return "rademacher";
    case NoiseKind::kUniform: return "uniform";
  }
  return "?";
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double draw_noise(std::mt19937_64& eng, NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kGaussian: {
      std::normal_distribution<double> dist(0.0, 1.0);
      return dist(eng);
    }
    case NoiseKind::kRademacher:
      return (eng() & 1ULL) ? 1.0 : -1.0;
    case NoiseKind::kUniform: {
      // variance-1 uniform on [-sqrt(3), sqrt(3)]
      std::uniform_real_distribution<double> dist(-std::sqrt(3.0),
                                                  std::sqrt(3.0));
      return dist(eng);
    }
  }
  return 0.0;
}

/// Triangular per-axis symbol f_hat(theta) = (1 - cos N0 theta)/(1 - cos theta).
double triangular_fhat(int N0, double theta) {
  double den = 1.0 - std::cos(theta);
  if (den < 1e-12) return static_cast<double>(N0) * N0;  // theta -> 0 limit
  return (1.0 - std::cos(N0 * theta)) / den;
}

/// Moving-average synthesis of one scalar component: sliding box sum of
/// length N0 along every axis (box * box = triangle).
void box_filter_inplace(const Shape& shape, Vec& x, int N0) {
  const int d = shape.dim();
  for (int a = 0; a < d; ++a) {
    const int len = shape.extent[a];
    long stride = 1;
    for (int b = a + 1; b < d; ++b) stride *= shape.extent[b];
    const long lines = shape.size() / len;
    Vec line(len);
    for (long l = 0; l < lines; ++l) {
      long outer = l / stride, inner = l % stride;
      long base = outer * stride * len + inner;
      for (int k = 0; k < len; ++k) {
        double s = 0.0;
        for (int j = 0; j < N0; ++j) s += x(base + ((k - j + len) % len) * stride);
        line(k) = s;
      }
      for (int k = 0; k < len; ++k) x(base + k * stride) = line(k);
    }
  }
}

/// Spectral synthesis of one block: Xhat = sqrt(qhat) xihat, Gaussian noise.
Mat spectral_block(const CovarianceSpec& spec, int block, const Box& box,
                   std::mt19937_64& eng) {
  const int n = spec.n;
  const long s = box.sites();
  TorusGrid grid(box.shape.extent, /*offset=*/false);
  std::normal_distribution<double> dist(0.0, 1.0);

  Eigen::MatrixXcd hat(n, s);
  VecC buf(s);
  for (int c = 0; c < n; ++c) {
    for (long f = 0; f < s; ++f) buf(f) = dist(eng);
    dft_forward(box.shape, buf);
    hat.row(c) = buf.transpose();
  }
  for (long f = 0; f < s; ++f) {
    MatC q = spec.symbol(block, grid.point(f));
    Eigen::SelfAdjointEigenSolver<MatC> es(q);
    MatC sqrt_q = es.eigenvectors() *
                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                  es.eigenvectors().adjoint();
    hat.col(f) = (sqrt_q * hat.col(f)).eval();
  }
  Mat out(n, s);
  double max_imag = 0.0, max_abs = 0.0;
  for (int c = 0; c < n; ++c) {
    buf = hat.row(c).transpose();
    dft_inverse(box.shape, buf);
    out.row(c) = buf.real().transpose();
    max_imag = std::max(max_imag, buf.imag().cwiseAbs().maxCoeff());
    max_abs = std::max(max_abs, buf.real().cwiseAbs().maxCoeff());
  }
  if (max_imag > 1e-12 * (1.0 + max_abs))
    throw std::runtime_error("spectral sampler: imaginary residue " +
                             std::to_string(max_imag));
  return out;
}

}  // namespace

MatC CovarianceSpec::symbol(int block, std::span<const double> theta) const {
  switch (kind) {
    case SpecKind::kTriangular: {
      double v = 1.0;
      for (double th : theta) v *= triangular_fhat(N0, th);
      return MatC::Constant(1, 1, v);
    }
    case SpecKind::kGibbs: {
      if (block == 0) {
        MatC vhat = symbol_at(gibbs_kernel, theta);
        return temperature * vhat.inverse();
      }
      return temperature * MatC::Identity(n, n);
    }
    case SpecKind::kCustomTable: {
      const auto& tab = block == 0 ? table00 : table11;
      MatC s = MatC::Zero(n, n);
      for (const auto& [z, m] : tab) {
        double phase = 0.0;
        for (int a = 0; a < d; ++a) phase += z[a] * theta[a];
        s += m.cast<Complex>() * std::exp(Complex(0.0, phase));
      }
      return 0.5 * (s + s.adjoint().eval());
    }
  }
  return {};
}

Mat CovarianceSpec::position(int block, std::span<const int> z) const {
  switch (kind) {
    case SpecKind::kTriangular: {
      double v = 1.0;
      for (int c : z) v *= std::max(0, N0 - std::abs(c));
      return Mat::Constant(1, 1, v);
    }
    case SpecKind::kGibbs:
      throw std::logic_error("CovarianceSpec: Gibbs kernel is not finite-range");
    case SpecKind::kCustomTable: {
      const auto& tab = block == 0 ? table00 : table11;
      auto it = tab.find(LatticePoint(z.begin(), z.end()));
      return it == tab.end() ? Mat::Zero(n, n) : it->second;
    }
  }
  return {};
}

CovarianceSpec triangular_spec(int N0, int d) {
  if (N0 < 1) throw std::invalid_argument("triangular_spec: N0 >= 1");
  CovarianceSpec s;
  s.kind = SpecKind::kTriangular;
  s.d = d;
  s.n = 1;
  s.N0 = N0;
  s.range = static_cast<int>(std::ceil(N0 * std::sqrt(double(d))));
  return s;
}

CovarianceSpec gibbs_spec(double T, const SpectralTable& table, double eps0) {
  if (T < 0.0) throw std::invalid_argument("gibbs_spec: T >= 0");
  for (const auto& e : table.entries) {
    Eigen::SelfAdjointEigenSolver<MatC> es(e.vhat,
                                           Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eps0)
      throw std::invalid_argument(
          "gibbs_spec: Vhat nearly singular on the grid (C0 not empty)");
  }
  CovarianceSpec s;
  s.kind = SpecKind::kGibbs;
  s.d = table.kernel.d;
  s.n = table.kernel.n;
  s.temperature = T;
  s.gibbs_kernel = table.kernel;
  return s;
}

CovarianceSpec custom_spec(int d, int n, std::map<LatticePoint, Mat> q00,
                           std::map<LatticePoint, Mat> q11) {
  CovarianceSpec s;
  s.kind = SpecKind::kCustomTable;
  s.d = d;
  s.n = n;
  s.table00 = std::move(q00);
  s.table11 = std::move(q11);
  for (const auto* tab : {&s.table00, &s.table11}) {
    for (const auto& [z, m] : *tab) {
      LatticePoint mz(z);
      for (int& c : mz) c = -c;
      auto it = tab->find(mz);
      Mat mirror = it == tab->end() ? Mat::Zero(n, n) : it->second;
      if ((mirror.transpose() - m).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("custom_spec: q0(z) != q0(-z)^T");
      s.range = std::max(s.range, sup_norm(z) + 1);
    }
  }
  return s;
}

FieldState sample_field(const CovarianceSpec& spec, const Box& box,
                        NoiseKind noise, std::uint64_t seed,
                        SamplerRecipe recipe) {
  if (box.half) throw std::invalid_argument("sample_field: full box expected");
  if (recipe == SamplerRecipe::kAuto)
    recipe = spec.kind == SpecKind::kTriangular ? SamplerRecipe::kMovingAverage
                                                : SamplerRecipe::kSpectral;

  if (spec.finite_range()) {
    for (int e : box.shape.extent)
      if (e < 2 * spec.range)
        throw std::invalid_argument(
            "sample_field: box extent below 2 r0, wrap correlation aliasing");
  }

  FieldState x(box, spec.n);
  std::mt19937_64 eng(seed);

  if (recipe == SamplerRecipe::kMovingAverage) {
    if (spec.kind != SpecKind::kTriangular)
      throw std::invalid_argument(
          "sample_field: moving-average recipe needs a triangular spec");
    for (Mat* dst : {&x.u, &x.v}) {
      Vec xi(box.sites());
      for (long s = 0; s < box.sites(); ++s) xi(s) = draw_noise(eng, noise);
      box_filter_inplace(box.shape, xi, spec.N0);
      dst->row(0) = xi.transpose();
    }
    return x;
  }

  if (noise != NoiseKind::kGaussian)
    throw std::invalid_argument(
        "sample_field: spectral recipe is Gaussian-only");
  x.u = spectral_block(spec, 0, box, eng);
  x.v = spectral_block(spec, 1, box, eng);
  return x;
}

double cutoff_zeta(int s, int a) {
  if (s <= 0) return 0.0;
  if (s > a) return 1.0;
  return static_cast<double>(s) / (a + 1);
}

FieldState cutoff_halfspace(const FieldState& x, int a) {
  if (x.box.half)
    throw std::invalid_argument("cutoff_halfspace: full field expected");
  if (x.box.shape.extent[0] % 2 != 0)
    throw std::invalid_argument("cutoff_halfspace: axis-1 extent must be even");
  std::vector<int> half_ext = x.box.shape.extent;
  half_ext[0] /= 2;
  FieldState y(Box{half_ext, true}, x.n);
  std::vector<int> idx(x.box.dim());
  for (long s = 0; s < y.sites(); ++s) {
    y.box.shape.unflatten(s, idx);
    double z = cutoff_zeta(idx[0], a);
    long src = x.box.shape.flat(idx);
    y.u.col(s) = z * x.u.col(src);
    y.v.col(s) = z * x.v.col(src);
  }
  return y;
}

EnsembleAccumulator::EnsembleAccumulator(std::vector<LatticePoint> probes_,
                                         int n_)
    : probes(std::move(probes_)), n(n_) {
  sum1 = Vec::Zero(dim());
  sum2 = Mat::Zero(dim(), dim());
  sum2sq = Mat::Zero(dim(), dim());
}

void EnsembleAccumulator::accumulate(const FieldState& y) {
  const long P = static_cast<long>(probes.size());
  Vec stacked(dim());
  for (long p = 0; p < P; ++p) {
    if (y.box.half &&
        (probes[p][0] < 0 || probes[p][0] >= y.box.shape.extent[0]))
      throw std::out_of_range("EnsembleAccumulator: probe outside box");
    long s = y.box.shape.flat_wrapped(probes[p]);
    stacked.segment(p * n, n) = y.u.col(s);
    stacked.segment((P + p) * n, n) = y.v.col(s);
  }
  sum1 += stacked;
  Mat outer = stacked * stacked.transpose();
  sum2 += outer;
  sum2sq += outer.cwiseProduct(outer);
  ++count;
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  if (other.probes != probes || other.n != n)
    throw std::invalid_argument("EnsembleAccumulator::merge: layout mismatch");
  sum1 += other.sum1;
  sum2 += other.sum2;
  sum2sq += other.sum2sq;
  count += other.count;
}

void EnsembleAccumulator::save(const std::string& path) const {
  nlohmann::json header;
  header["n"] = n;
  header["count"] = count;
  header["probes"] = probes;
  std::string head = header.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("accumulator save: cannot open " + path);
  std::uint64_t hlen = head.size();
  f.write(reinterpret_cast<const char*>(&hlen), 8);
  f.write(head.data(), static_cast<std::streamsize>(hlen));
  auto dump = [&](const double* p, long cnt) {
    f.write(reinterpret_cast<const char*>(p),
            static_cast<std::streamsize>(cnt * 8));
  };
  dump(sum1.data(), sum1.size());
  dump(sum2.data(), sum2.size());
  dump(sum2sq.data(), sum2sq.size());
}

EnsembleAccumulator EnsembleAccumulator::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("accumulator load: cannot open " + path);
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 8);
  std::string head(hlen, '\0');
  f.read(head.data(), static_cast<std::streamsize>(hlen));
  nlohmann::json header = nlohmann::json::parse(head);
  EnsembleAccumulator acc(
      header.at("probes").get<std::vector<LatticePoint>>(),
      header.at("n").get<int>());
  acc.count = header.at("count").get<long>();
  auto slurp = [&](double* p, long cnt) {
    f.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(cnt * 8));
  };
  slurp(acc.sum1.data(), acc.sum1.size());
  slurp(acc.sum2.data(), acc.sum2.size());
  slurp(acc.sum2sq.data(), acc.sum2sq.size());
  if (!f) throw std::runtime_error("accumulator load: truncated " + path);
  return acc;
}

}  // namespace hcl
