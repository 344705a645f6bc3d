#include "hcl/kernel.hpp"

#include "json.hpp"

#include <cmath>
#include <stdexcept>

namespace hcl {

bool InteractionKernel::check_symmetry(double tol) const {
  for (const auto& [z, V] : table) {
    LatticePoint mz(z);
    for (int& c : mz) c = -c;
    auto it = table.find(mz);
    if (it == table.end()) {
      if (V.cwiseAbs().maxCoeff() > tol) return false;
      continue;
    }
    if ((it->second.transpose() - V).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool InteractionKernel::check_even_in_z1(double tol) const {
  for (const auto& [z, V] : table) {
    LatticePoint zr = reflect(z);
    auto it = table.find(zr);
    if (it == table.end()) {
      if (V.cwiseAbs().maxCoeff() > tol) return false;
      continue;
    }
    if ((it->second - V).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

InteractionKernel build_nn_kernel(int d, int n, const Vec& gamma,
                                  const Vec& mass) {
  if (d < 1 || n < 1) throw std::invalid_argument("build_nn_kernel: d, n >= 1");
  if (gamma.size() != n || mass.size() != n)
    throw std::invalid_argument("build_nn_kernel: need n gammas and n masses");
  if ((gamma.array() <= 0.0).any())
    throw std::invalid_argument("build_nn_kernel: gamma_k must be positive");
  if ((mass.array() < 0.0).any())
    throw std::invalid_argument("build_nn_kernel: m_k must be nonnegative");

  InteractionKernel k;
  k.d = d;
  k.n = n;
  k.radius = 1;
  k.nn_gamma = gamma;
  k.nn_mass = mass;

  Mat diag0 = Mat::Zero(n, n);
  for (int c = 0; c < n; ++c)
    diag0(c, c) = 2.0 * d * gamma(c) + mass(c) * mass(c);
  k.table[LatticePoint(d, 0)] = diag0;

  Mat neighbor = Mat::Zero(n, n);
  for (int c = 0; c < n; ++c) neighbor(c, c) = -gamma(c);
  for (int a = 0; a < d; ++a) {
    for (int s : {-1, 1}) {
      LatticePoint z(d, 0);
      z[a] = s;
      k.table[z] = neighbor;
    }
  }
  return k;
}

MatC symbol_at(const InteractionKernel& kernel,
               std::span<const double> theta) {
  MatC S = MatC::Zero(kernel.n, kernel.n);
  for (const auto& [z, V] : kernel.table) {
    double phase = 0.0;
    for (int a = 0; a < kernel.d; ++a) phase += z[a] * theta[a];
    S += V.cast<Complex>() * std::exp(Complex(0.0, phase));
  }
  return 0.5 * (S + S.adjoint().eval());
}

double nn_dispersion(double gamma, double mass,
                     std::span<const double> theta) {
  double s = mass * mass;
  for (double th : theta) s += 2.0 * gamma * (1.0 - std::cos(th));
  return std::sqrt(s);
}

std::string kernel_to_json(const InteractionKernel& kernel) {
  nlohmann::json j;
  j["d"] = kernel.d;
  j["n"] = kernel.n;
  if (kernel.is_nn()) {
    j["family"] = "nearest-neighbor";
    j["gamma"] = std::vector<double>(kernel.nn_gamma->begin(),
                                     kernel.nn_gamma->end());
    j["mass"] =
        std::vector<double>(kernel.nn_mass->begin(), kernel.nn_mass->end());
  } else {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [z, V] : kernel.table) {
      nlohmann::json e;
      e["z"] = z;
      std::vector<std::vector<double>> rows(kernel.n,
                                            std::vector<double>(kernel.n));
      for (int r = 0; r < kernel.n; ++r)
        for (int c = 0; c < kernel.n; ++c) rows[r][c] = V(r, c);
      e["matrix"] = rows;
      entries.push_back(e);
    }
    j["entries"] = entries;
  }
  return j.dump(2);
}

InteractionKernel kernel_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  int d = j.at("d").get<int>();
  int n = j.at("n").get<int>();
  if (j.contains("family")) {
    if (j["family"] != "nearest-neighbor")
      throw std::invalid_argument("kernel_from_json: unknown family " +
                                  j["family"].get<std::string>());
    auto g = j.at("gamma").get<std::vector<double>>();
    auto m = j.at("mass").get<std::vector<double>>();
    Vec gamma = Eigen::Map<Vec>(g.data(), static_cast<long>(g.size()));
    Vec mass = Eigen::Map<Vec>(m.data(), static_cast<long>(m.size()));
    return build_nn_kernel(d, n, gamma, mass);
  }
  InteractionKernel k;
  k.d = d;
  k.n = n;
  for (const auto& e : j.at("entries")) {
    LatticePoint z = e.at("z").get<std::vector<int>>();
    if (static_cast<int>(z.size()) != d)
      throw std::invalid_argument("kernel_from_json: bad site dimension");
    auto rows = e.at("matrix").get<std::vector<std::vector<double>>>();
    Mat V(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) V(r, c) = rows.at(r).at(c);
    k.table[z] = V;
    k.radius = std::max(k.radius, sup_norm(z));
  }
  return k;
}

}  // namespace hcl
