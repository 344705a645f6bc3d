#include "hcl/harness.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hcl {

using nlohmann::json;

namespace {

json mat_to_json(const Mat& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  return json(rows);
}

Mat mat_from_json(const json& j) {
  auto rows = j.get<std::vector<std::vector<double>>>();
  Mat m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  return m;
}

json table_to_json(const std::map<LatticePoint, Mat>& t) {
  json arr = json::array();
  for (const auto& [z, m] : t) arr.push_back({{"z", z}, {"matrix", mat_to_json(m)}});
  return arr;
}

std::map<LatticePoint, Mat> table_from_json(const json& arr) {
  std::map<LatticePoint, Mat> t;
  for (const auto& e : arr)
    t[e.at("z").get<std::vector<int>>()] = mat_from_json(e.at("matrix"));
  return t;
}

std::string spec_kind_name(SpecKind k) {
  switch (k) {
    case SpecKind::kTriangular: return "triangular";
    case SpecKind::kGibbs: return "gibbs";
    case SpecKind::kCustomTable: return "custom";
  }
  return "triangular";
}

SpecKind spec_kind_from(const std::string& s) {
  if (s == "triangular") return SpecKind::kTriangular;
  if (s == "gibbs") return SpecKind::kGibbs;
  if (s == "custom") return SpecKind::kCustomTable;
  throw std::invalid_argument("unknown covariance kind: " + s);
}

}  // namespace

FieldState build_psi(const PsiConfig& psi, const Box& half_box, int n) {
  if (!half_box.half) throw std::invalid_argument("build_psi: need a half box");
  FieldState f(half_box, n);
  const int d = half_box.dim();
  if (psi.kind == PsiConfig::Kind::kPointMasses) {
    for (const PointMass& pm : psi.masses) {
      if (static_cast<int>(pm.z.size()) != d)
        throw std::invalid_argument("build_psi: point dimension mismatch");
      if (pm.z[0] <= 0 || pm.z[0] >= half_box.shape.extent[0])
        throw std::invalid_argument("build_psi: point outside the half box");
      long s = half_box.shape.flat_wrapped(pm.z);
      Mat& dst = pm.block == 0 ? f.u : f.v;
      dst(pm.component, s) += pm.value;
    }
    return f;
  }
  if (static_cast<int>(psi.center.size()) != d ||
      static_cast<int>(psi.wavevector.size()) != d)
    throw std::invalid_argument("build_psi: wave packet dimension mismatch");
  const double w = psi.width;
  const double cut = 6.0 * w;
  std::vector<int> idx(d);
  Mat& dst = psi.block == 0 ? f.u : f.v;
  for (long s = 0; s < half_box.sites(); ++s) {
    half_box.shape.unflatten(s, idx);
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < d; ++a) {
      double c = a == 0 ? idx[a] : half_box.shape.signed_coord(idx[a], a);
      double dz = c - psi.center[a];
      r2 += dz * dz;
      phase += psi.wavevector[a] * dz;
    }
    if (idx[0] == 0 || r2 > cut * cut) continue;
    dst(psi.component, s) = std::exp(-r2 / (2.0 * w * w)) * std::cos(phase);
  }
  return f;
}

double psi_support_radius(const PsiConfig& psi, std::vector<double>& center) {
  if (psi.kind == PsiConfig::Kind::kWavePacket) {
    center.assign(psi.center.begin(), psi.center.end());
    return 6.0 * psi.width;
  }
  if (psi.masses.empty()) throw std::invalid_argument("psi: empty support");
  const int d = static_cast<int>(psi.masses.front().z.size());
  center.assign(d, 0.0);
  for (const PointMass& pm : psi.masses)
    for (int a = 0; a < d; ++a) center[a] += pm.z[a];
  for (double& c : center) c /= static_cast<double>(psi.masses.size());
  double r = 0.0;
  for (const PointMass& pm : psi.masses) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double dz = pm.z[a] - center[a];
      r2 += dz * dz;
    }
    r = std::max(r, std::sqrt(r2));
  }
  return r;
}

CovarianceSpec CovarianceConfig::build(int d, int n,
                                       const SpectralTable& offset_table) const {
  switch (kind) {
    case SpecKind::kTriangular:
      if (n != 1)
        throw std::invalid_argument("triangular covariance is scalar (n = 1)");
      return triangular_spec(N0, d);
    case SpecKind::kGibbs:
      return gibbs_spec(temperature, offset_table);
    case SpecKind::kCustomTable:
      return custom_spec(d, n, q00, q11);
  }
  throw std::logic_error("CovarianceConfig::build: unreachable");
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["kernel"] = json::parse(kernel_to_json(kernel));
  j["box"] = box;
  j["grid_n"] = grid_n;
  json cov;
  cov["kind"] = spec_kind_name(covariance.kind);
  cov["N0"] = covariance.N0;
  cov["temperature"] = covariance.temperature;
  if (covariance.kind == SpecKind::kCustomTable) {
    cov["q00"] = table_to_json(covariance.q00);
    cov["q11"] = table_to_json(covariance.q11);
  }
  j["covariance"] = cov;
  j["cutoff_a"] = cutoff_a;
  j["times"] = times;
  j["probes"] = probes;
  j["ensemble"] = ensemble;
  j["seed"] = seed;
  j["noise"] = to_string(noise);
  j["out"] = out;
  j["workers"] = workers;
  json p;
  if (psi.kind == PsiConfig::Kind::kWavePacket) {
    p["type"] = "wavepacket";
    p["center"] = psi.center;
    p["wavevector"] = psi.wavevector;
    p["width"] = psi.width;
    p["block"] = psi.block;
    p["component"] = psi.component;
  } else {
    p["type"] = "points";
    json masses = json::array();
    for (const PointMass& pm : psi.masses)
      masses.push_back({{"z", pm.z},
                        {"block", pm.block},
                        {"component", pm.component},
                        {"value", pm.value}});
    p["masses"] = masses;
  }
  j["psi"] = p;
  j["tolerances"] = {{"convergence", tol.convergence},
                     {"slack", tol.slack},
                     {"refinement", tol.refinement},
                     {"stationarity", tol.stationarity},
                     {"decay_slope", tol.decay_slope},
                     {"cone_mass", tol.cone_mass}};
  j["condition_tolerances"] = {{"eps0", cond_tol.eps0},
                               {"eps_hess", cond_tol.eps_hess},
                               {"eps_const", cond_tol.eps_const},
                               {"divergence_factor", cond_tol.divergence_factor}};
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig c;
  c.kernel = kernel_from_json(j.at("kernel").dump());
  c.box = j.at("box").get<std::vector<int>>();
  if (static_cast<int>(c.box.size()) != c.kernel.d)
    throw std::invalid_argument("config: box rank must match kernel d");
  c.grid_n = j.value("grid_n", 64);
  if (j.contains("covariance")) {
    const json& cov = j["covariance"];
    c.covariance.kind = spec_kind_from(cov.value("kind", "triangular"));
    c.covariance.N0 = cov.value("N0", 2);
    c.covariance.temperature = cov.value("temperature", 1.0);
    if (cov.contains("q00")) c.covariance.q00 = table_from_json(cov["q00"]);
    if (cov.contains("q11")) c.covariance.q11 = table_from_json(cov["q11"]);
  }
  c.cutoff_a = j.value("cutoff_a", 0);
  if (j.contains("times")) c.times = j["times"].get<std::vector<double>>();
  if (j.contains("probes"))
    c.probes = j["probes"].get<std::vector<LatticePoint>>();
  c.ensemble = j.value("ensemble", 0L);
  c.seed = j.value("seed", std::uint64_t{1});
  c.noise = noise_from_string(j.value("noise", "gaussian"));
  c.out = j.value("out", "out");
  c.workers = j.value("workers", 0);
  if (j.contains("psi")) {
    const json& p = j["psi"];
    std::string type = p.value("type", "points");
    if (type == "wavepacket") {
      c.psi.kind = PsiConfig::Kind::kWavePacket;
      c.psi.center = p.at("center").get<std::vector<int>>();
      c.psi.wavevector = p.at("wavevector").get<std::vector<double>>();
      c.psi.width = p.value("width", 4.0);
      c.psi.block = p.value("block", 0);
      c.psi.component = p.value("component", 0);
    } else if (type == "points") {
      c.psi.kind = PsiConfig::Kind::kPointMasses;
      for (const auto& m : p.value("masses", json::array())) {
        PointMass pm;
        pm.z = m.at("z").get<std::vector<int>>();
        pm.block = m.value("block", 0);
        pm.component = m.value("component", 0);
        pm.value = m.value("value", 1.0);
        c.psi.masses.push_back(std::move(pm));
      }
    } else {
      throw std::invalid_argument("config: unknown psi type " + type);
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    c.tol.convergence = t.value("convergence", c.tol.convergence);
    c.tol.slack = t.value("slack", c.tol.slack);
    c.tol.refinement = t.value("refinement", c.tol.refinement);
    c.tol.stationarity = t.value("stationarity", c.tol.stationarity);
    c.tol.decay_slope = t.value("decay_slope", c.tol.decay_slope);
    c.tol.cone_mass = t.value("cone_mass", c.tol.cone_mass);
  }
  if (j.contains("condition_tolerances")) {
    const json& t = j["condition_tolerances"];
    c.cond_tol.eps0 = t.value("eps0", c.cond_tol.eps0);
    c.cond_tol.eps_hess = t.value("eps_hess", c.cond_tol.eps_hess);
    c.cond_tol.eps_const = t.value("eps_const", c.cond_tol.eps_const);
    c.cond_tol.divergence_factor =
        t.value("divergence_factor", c.cond_tol.divergence_factor);
  }
  for (int e : c.box)
    if (e < 2) throw std::invalid_argument("config: box extents must be >= 2");
  for (const auto& p : c.probes)
    if (static_cast<int>(p.size()) != c.kernel.d)
      throw std::invalid_argument("config: probe rank must match kernel d");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return ExperimentConfig::from_json(read_text(path));
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

std::string file_digest(const std::string& path) {
  return digest_hex(read_text(path));
}

void RunManifest::add(const std::string& base_dir, const std::string& name) {
  artifacts.emplace_back(name, file_digest(base_dir + "/" + name));
}

void RunManifest::write(const std::string& base_dir) const {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["wall_ms"] = wall_ms;
  j["workers"] = workers;
  json arts = json::array();
  for (const auto& [name, dig] : artifacts)
    arts.push_back({{"path", name}, {"digest", dig}});
  j["artifacts"] = arts;
  write_text(base_dir + "/manifest.json", j.dump(2) + "\n");
}

RunManifest RunManifest::read(const std::string& path) {
  json j = json::parse(read_text(path));
  RunManifest m;
  m.command = j.value("command", "");
  m.config_hash = j.value("config_hash", "");
  m.code_version = j.value("code_version", "");
  m.wall_ms = j.value("wall_ms", 0L);
  m.workers = j.value("workers", 0);
  for (const auto& a : j.value("artifacts", json::array()))
    m.artifacts.emplace_back(a.at("path").get<std::string>(),
                             a.at("digest").get<std::string>());
  return m;
}

std::vector<std::string> RunManifest::verify(const std::string& base_dir) const {
  std::vector<std::string> bad;
  for (const auto& [name, dig] : artifacts) {
    try {
      if (file_digest(base_dir + "/" + name) != dig) bad.push_back(name);
    } catch (const std::exception&) {
      bad.push_back(name);
    }
  }
  return bad;
}

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace hcl
