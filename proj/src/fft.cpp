#include "hcl/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <numbers>

namespace hcl {

namespace {

enum class Dir { Forward, Inverse };

/// Applies a 1-d transform along `axis` to every line of the array.
void transform_axis(const Shape& shape, VecC& data, int axis, Dir dir) {
  const int d = shape.dim();
  const int len = shape.extent[axis];
  long stride = 1;
  for (int a = axis + 1; a < d; ++a) stride *= shape.extent[a];
  const long lines = shape.size() / len;

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  VecC line(len), out(len);

  for (long l = 0; l < lines; ++l) {
    // base offset of the l-th line: split l into (outer, inner) parts
    long outer = l / stride, inner = l % stride;
    long base = outer * stride * len + inner;
    for (int k = 0; k < len; ++k) line(k) = data(base + k * stride);
    // Eigen's fwd uses exp(-i 2 pi k z / N); the symbol convention uses
    // exp(+i ...), so forward here is Eigen's unscaled inverse
    if (dir == Dir::Forward)
      fft.inv(out, line);
    else
      fft.fwd(out, line);
    for (int k = 0; k < len; ++k) data(base + k * stride) = out(k);
  }
}

}  // namespace

void dft_forward(const Shape& shape, VecC& data) {
  for (int a = 0; a < shape.dim(); ++a)
    transform_axis(shape, data, a, Dir::Forward);
}

void dft_inverse(const Shape& shape, VecC& data) {
  for (int a = 0; a < shape.dim(); ++a)
    transform_axis(shape, data, a, Dir::Inverse);
  data /= static_cast<double>(shape.size());
}

void dft_inverse_offset(const Shape& shape, VecC& data) {
  for (int a = 0; a < shape.dim(); ++a)
    transform_axis(shape, data, a, Dir::Inverse);
  data /= static_cast<double>(shape.size());
  // half-cell shift: multiply entry z by prod_a exp(-i pi z_a / N_a) with the
  // signed representative of z_a
  const int d = shape.dim();
  std::vector<int> idx(d);
  for (long f = 0; f < shape.size(); ++f) {
    shape.unflatten(f, idx);
    double phase = 0.0;
    for (int a = 0; a < d; ++a)
      phase -= std::numbers::pi * shape.signed_coord(idx[a], a) /
               shape.extent[a];
    data(f) *= std::exp(Complex(0.0, phase));
  }
}

}  // namespace hcl
