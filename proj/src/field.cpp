#include "hcl/field.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hcl {

namespace {

/// Flat site indices of the z1 = 0 layer.
template <typename F>
void for_boundary_layer(const Box& box, F&& f) {
  Shape bar{std::vector<int>(box.shape.extent.begin() + 1,
                             box.shape.extent.end())};
  std::vector<int> idx(box.dim(), 0);
  long m = bar.size();
  std::vector<int> sub(std::max(box.dim() - 1, 1));
  for (long r = 0; r < m; ++r) {
    if (box.dim() > 1) bar.unflatten(r, sub);
    idx[0] = 0;
    for (int a = 1; a < box.dim(); ++a) idx[a] = sub[a - 1];
    f(box.shape.flat(idx));
  }
}

}  // namespace

double FieldState::boundary_abs_max() const {
  double m = 0.0;
  for_boundary_layer(box, [&](long s) {
    m = std::max({m, u.col(s).cwiseAbs().maxCoeff(),
                  v.col(s).cwiseAbs().maxCoeff()});
  });
  return m;
}

void FieldState::clamp_boundary() {
  for_boundary_layer(box, [&](long s) {
    u.col(s).setZero();
    v.col(s).setZero();
  });
}

double inner_half(const FieldState& a, const FieldState& b) {
  if (!(a.box == b.box) || a.n != b.n)
    throw std::invalid_argument("inner_half: mismatched fields");
  const Shape& sh = a.box.shape;
  std::vector<int> idx(a.box.dim());
  double sum = 0.0;
  for (long s = 0; s < a.sites(); ++s) {
    sh.unflatten(s, idx);
    int z1 = a.box.half ? idx[0] : sh.signed_coord(idx[0], 0);
    if (z1 <= 0) continue;
    sum += a.u.col(s).dot(b.u.col(s)) + a.v.col(s).dot(b.v.col(s));
  }
  return sum;
}

void save_field(const FieldState& x, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_field: cannot open " + path);
  int32_t d = x.box.dim(), n = x.n, half = x.box.half ? 1 : 0;
  f.write(reinterpret_cast<const char*>(&d), 4);
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(&half), 4);
  for (int e : x.box.shape.extent) {
    int32_t v = e;
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  auto dump = [&](const Mat& m) {
    for (long s = 0; s < m.cols(); ++s)
      for (int r = 0; r < m.rows(); ++r) {
        double val = m(r, s);
        f.write(reinterpret_cast<const char*>(&val), 8);
      }
  };
  dump(x.u);
  dump(x.v);

  nlohmann::json j;
  j["d"] = d;
  j["n"] = n;
  j["flavor"] = half ? "half" : "full";
  j["L"] = x.box.shape.extent;
  j["layout"] = "header(int32: d, n, flavor, L[d]) then row-major doubles, "
                "u then v, components fastest";
  std::ofstream side(path + ".json");
  side << j.dump(2) << "\n";
}

FieldState load_field(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_field: cannot open " + path);
  int32_t d = 0, n = 0, half = 0;
  f.read(reinterpret_cast<char*>(&d), 4);
  f.read(reinterpret_cast<char*>(&n), 4);
  f.read(reinterpret_cast<char*>(&half), 4);
  std::vector<int> L(d);
  for (int a = 0; a < d; ++a) {
    int32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    L[a] = v;
  }
  FieldState x(Box{L, half != 0}, n);
  auto slurp = [&](Mat& m) {
    for (long s = 0; s < m.cols(); ++s)
      for (int r = 0; r < m.rows(); ++r) {
        double val = 0;
        f.read(reinterpret_cast<char*>(&val), 8);
        m(r, s) = val;
      }
  };
  slurp(x.u);
  slurp(x.v);
  if (!f) throw std::runtime_error("load_field: truncated file " + path);
  return x;
}

std::string field_slice_csv(const FieldState& x) {
  std::ostringstream os;
  os.precision(17);
  os << std::scientific;
  os << "z1";
  for (int c = 0; c < x.n; ++c) os << ",u" << c + 1;
  for (int c = 0; c < x.n; ++c) os << ",v" << c + 1;
  os << "\n";
  std::vector<int> idx(x.box.dim(), 0);
  for (int z1 = 0; z1 < x.box.shape.extent[0]; ++z1) {
    idx[0] = z1;
    long s = x.box.shape.flat(idx);
    os << z1;
    for (int c = 0; c < x.n; ++c) os << "," << x.u(c, s);
    for (int c = 0; c < x.n; ++c) os << "," << x.v(c, s);
    os << "\n";
  }
  return os.str();
}

}  // namespace hcl
