#include "qfi_rixs/angular.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace qfi::angular {

using nlohmann::json;

namespace {

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > 170) throw DomainError("factorial argument out of range");
  return table[n];
}

void check_pair(HalfInt j, HalfInt m, const char* name) {
  if (j.twice < 0) throw DomainError(std::string(name) + ": negative angular momentum");
  if (std::abs(m.twice) > j.twice) throw DomainError(std::string(name) + ": |m| exceeds j");
  if ((j.twice - m.twice) % 2 != 0) {
    throw DomainError(std::string(name) + ": j and m must both be integer or half-integer");
  }
}

}  // namespace

HalfInt HalfInt::from_double(double v) {
  const double t = std::round(2.0 * v);
  if (std::abs(2.0 * v - t) > 1e-12) throw DomainError("not a half-integer: " + std::to_string(v));
  return {static_cast<int>(t)};
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  check_pair(j1, m1, "j1");
  check_pair(j2, m2, "j2");
  check_pair(J, M, "J");
  if (m1.twice + m2.twice != M.twice) return 0.0;
  if (J.twice < std::abs(j1.twice - j2.twice) || J.twice > j1.twice + j2.twice) return 0.0;
  if ((j1.twice + j2.twice + J.twice) % 2 != 0) return 0.0;

  // All arguments below are integers once halved.
  const int a = (j1.twice + j2.twice - J.twice) / 2;
  const int b = (j1.twice - m1.twice) / 2;
  const int c = (j2.twice + m2.twice) / 2;
  const int d = (J.twice - j2.twice + m1.twice) / 2;
  const int e = (J.twice - j1.twice - m2.twice) / 2;

  const int kmin = std::max({0, -d, -e});
  const int kmax = std::min({a, b, c});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double denom = factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k) *
                         factorial(d + k) * factorial(e + k);
    sum += (k % 2 == 0 ? 1.0 : -1.0) / denom;
  }

  const double pre =
      (J.twice + 1) * factorial((J.twice + j1.twice - j2.twice) / 2) *
      factorial((J.twice - j1.twice + j2.twice) / 2) * factorial(a) /
      factorial((j1.twice + j2.twice + J.twice) / 2 + 1);
  const double norm = factorial((J.twice + M.twice) / 2) * factorial((J.twice - M.twice) / 2) *
                      factorial(b) * factorial((j1.twice + m1.twice) / 2) *
                      factorial((j2.twice - m2.twice) / 2) * factorial(c);
  return std::sqrt(pre * norm) * sum;
}

double gaunt_c1(int lp, int mp, int l, int m, int q) {
  if (mp != m + q) return 0.0;
  if (std::abs(lp - l) != 1) return 0.0;
  const double reduced =
      std::sqrt((2.0 * l + 1.0) / (2.0 * lp + 1.0)) *
      clebsch_gordan(HalfInt::whole(l), HalfInt::whole(0), HalfInt::whole(1), HalfInt::whole(0),
                     HalfInt::whole(lp), HalfInt::whole(0));
  return reduced * clebsch_gordan(HalfInt::whole(l), HalfInt::whole(m), HalfInt::whole(1),
                                  HalfInt::whole(q), HalfInt::whole(lp), HalfInt::whole(mp));
}

std::array<cplx, 3> spherical_tensor_components(const geometry::PolarizationVector& eps) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx ex = eps[0];
  const cplx ey = eps[1];
  const cplx ez = eps[2];
  return {s * (ex + kI * ey), ez, -s * (ex - kI * ey)};
}

CMatrix real_harmonic_transform(int l) {
  const int dim = 2 * l + 1;
  CMatrix u = CMatrix::Zero(dim, dim);
  const double s = 1.0 / std::sqrt(2.0);
  const auto idx = [l](int m) { return m + l; };
  for (int mr = -l; mr <= l; ++mr) {
    const int col = idx(mr);
    const int am = std::abs(mr);
    const double sign = am % 2 == 0 ? 1.0 : -1.0;
    if (mr == 0) {
      u(idx(0), col) = 1.0;
    } else if (mr > 0) {
      u(idx(-am), col) = s;
      u(idx(am), col) = sign * s;
    } else {
      u(idx(-am), col) = kI * s;
      u(idx(am), col) = -sign * kI * s;
    }
  }
  return u;
}

std::string cubic_orbital_name(int l, int m_real) {
  if (l == 2) {
    static const char* names[] = {"xy", "yz", "z2", "xz", "x2-y2"};
    if (m_real >= -2 && m_real <= 2) return names[m_real + 2];
  }
  if (l == 1) {
    static const char* names[] = {"y", "z", "x"};
    if (m_real >= -1 && m_real <= 1) return names[m_real + 1];
  }
  return "l" + std::to_string(l) + "m" + std::to_string(m_real);
}

OrbitalBasis OrbitalBasis::l_edge_3d(ValenceFrame frame) {
  OrbitalBasis b;
  for (Spin s : {Spin::up, Spin::down}) {
    for (int m = -1; m <= 1; ++m) b.core.push_back({2, 1, m, s});
    for (int m = -2; m <= 2; ++m) b.valence.push_back({3, 2, m, s});
  }
  b.frame = frame;
  if (frame == ValenceFrame::cubic) {
    const CMatrix u = real_harmonic_transform(2);
    b.valence_transform = CMatrix::Zero(10, 10);
    b.valence_transform.block(0, 0, 5, 5) = u;
    b.valence_transform.block(5, 5, 5, 5) = u;
  } else {
    b.valence_transform = CMatrix::Identity(10, 10);
  }
  return b;
}

void OrbitalBasis::validate() const {
  for (const auto* list : {&core, &valence}) {
    std::set<std::tuple<int, int, int, int>> seen;
    for (const auto& o : *list) {
      if (o.l < 0 || std::abs(o.ml) > o.l) throw DomainError("spin-orbital with |ml| > l");
      if (!seen.emplace(o.n, o.l, o.ml, static_cast<int>(o.spin)).second) {
        throw DomainError("duplicate spin-orbital in basis");
      }
    }
  }
  const auto nv = static_cast<Eigen::Index>(valence.size());
  if (valence_transform.size() != 0) {
    if (valence_transform.rows() != nv || valence_transform.cols() != nv) {
      throw DomainError("valence transform does not match the valence basis size");
    }
    const double dev =
        (valence_transform.adjoint() * valence_transform - CMatrix::Identity(nv, nv))
            .cwiseAbs()
            .maxCoeff();
    if (dev > 1e-12) throw DomainError("valence transform is not unitary");
  }
}

DipoleMatrix dipole_matrix(const geometry::PolarizationVector& eps, const OrbitalBasis& basis,
                           double radial) {
  basis.validate();
  if (basis.core.empty() || basis.valence.empty()) throw DomainError("empty orbital basis");
  const auto c = spherical_tensor_components(eps);
  const auto nc = static_cast<Eigen::Index>(basis.core.size());
  const auto nv = static_cast<Eigen::Index>(basis.valence.size());

  // In the cubic frame the listed ml are real-harmonic labels; the amplitudes
  // are built in the underlying spherical basis and rotated at the end.
  CMatrix m = CMatrix::Zero(nc, nv);
  for (Eigen::Index a = 0; a < nc; ++a) {
    const auto& co = basis.core[a];
    for (Eigen::Index b = 0; b < nv; ++b) {
      const auto& vo = basis.valence[b];
      if (co.spin != vo.spin) continue;
      const int q = co.ml - vo.ml;
      if (std::abs(q) > 1) continue;
      m(a, b) = radial * c[q + 1] * gaunt_c1(co.l, co.ml, vo.l, vo.ml, q);
    }
  }
  if (basis.frame == ValenceFrame::cubic) m = m * basis.valence_transform;
  return {m, eps, radial};
}

DipoleMatrix restrict_valence(const DipoleMatrix& m, std::span<const int> columns) {
  DipoleMatrix out{CMatrix(m.entries.rows(), static_cast<Eigen::Index>(columns.size())),
                   m.polarization, m.radial_integral};
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] < 0 || columns[k] >= m.entries.cols()) {
      throw DomainError("valence column index out of range");
    }
    out.entries.col(static_cast<Eigen::Index>(k)) = m.entries.col(columns[k]);
  }
  return out;
}

CMatrix dipole_from_cartesian(const std::array<CMatrix, 3>& cartesian,
                              const geometry::PolarizationVector& eps) {
  return eps[0] * cartesian[0] + eps[1] * cartesian[1] + eps[2] * cartesian[2];
}

// ---------------------------------------------------------------------------
// JSON exchange format

namespace {

json orbital_to_json(const SpinOrbital& o) {
  return {{"n", o.n}, {"l", o.l}, {"ml", o.ml}, {"spin", o.spin == Spin::up ? "up" : "down"}};
}

SpinOrbital orbital_from_json(const json& j, const std::string& where) {
  try {
    SpinOrbital o;
    o.n = j.at("n").get<int>();
    o.l = j.at("l").get<int>();
    o.ml = j.at("ml").get<int>();
    const auto spin = j.at("spin").get<std::string>();
    if (spin == "up") {
      o.spin = Spin::up;
    } else if (spin == "down") {
      o.spin = Spin::down;
    } else {
      throw DataError(where + ": spin must be \"up\" or \"down\"");
    }
    return o;
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

double number_from_json(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    // Textual NaN/Inf is accepted by the parser so it can be reported precisely.
    const auto s = v.get<std::string>();
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  throw DataError(where + ": expected a number");
}

CMatrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                         const std::string& name) {
  if (!j.is_array()) throw DataError(name + ": matrix must be an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(name + ": dimension mismatch, expected " + std::to_string(rows) +
                    " rows (core basis) but found " + std::to_string(j.size()));
  }
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(name + ": dimension mismatch in row " + std::to_string(r) + ", expected " +
                      std::to_string(cols) + " columns (valence basis)");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::string where = name + " row " + std::to_string(r) + " column " + std::to_string(c);
      const auto& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2) throw DataError(where + ": expected [re, im]");
      const double re = number_from_json(e[0], where);
      const double im = number_from_json(e[1], where);
      if (!std::isfinite(re) || !std::isfinite(im)) throw DataError(where + ": non-finite entry");
      m(r, c) = {re, im};
    }
  }
  return m;
}

json vector_to_json(const CVec3& v) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

std::optional<geometry::PolarizationVector> vector_from_json(const json& j,
                                                             const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw DataError(where + ": polarization needs 3 entries");
  CVec3 v;
  for (int i = 0; i < 3; ++i) {
    const auto& e = j[static_cast<std::size_t>(i)];
    if (!e.is_array() || e.size() != 2) throw DataError(where + ": expected [re, im]");
    v[i] = {number_from_json(e[0], where), number_from_json(e[1], where)};
  }
  try {
    return geometry::PolarizationVector(v);
  } catch (const DomainError& e) {
    throw DataError(where + ": " + e.what());
  }
}

}  // namespace

std::string dump_dipole_json(const DipoleFile& file) {
  json j;
  j["core_basis"] = json::array();
  for (const auto& o : file.basis.core) j["core_basis"].push_back(orbital_to_json(o));
  j["valence_basis"] = json::array();
  for (const auto& o : file.basis.valence) j["valence_basis"].push_back(orbital_to_json(o));
  j["valence_frame"] = file.basis.frame == ValenceFrame::cubic ? "cubic" : "spherical";
  j["radial_integral"] = file.radial_integral;
  j["matrices"]["eps_i"] = matrix_to_json(file.eps_i.entries);
  j["matrices"]["eps_s"] = matrix_to_json(file.eps_s.entries);
  if (file.eps_i.polarization && file.eps_s.polarization) {
    j["polarizations"]["eps_i"] = vector_to_json(file.eps_i.polarization->components());
    j["polarizations"]["eps_s"] = vector_to_json(file.eps_s.polarization->components());
  }
  if (file.cartesian) {
    j["cartesian"]["x"] = matrix_to_json((*file.cartesian)[0]);
    j["cartesian"]["y"] = matrix_to_json((*file.cartesian)[1]);
    j["cartesian"]["z"] = matrix_to_json((*file.cartesian)[2]);
  }
  return j.dump(2) + "\n";
}

DipoleFile parse_dipole_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed dipole file: ") + e.what());
  }
  if (!j.is_object()) throw DataError("dipole file must be a JSON object");
  for (const char* key : {"core_basis", "valence_basis", "matrices"}) {
    if (!j.contains(key)) throw DataError(std::string("dipole file is missing \"") + key + "\"");
  }

  DipoleFile f;
  const auto read_basis = [](const json& arr, const std::string& name) {
    if (!arr.is_array() || arr.empty()) throw DataError(name + " must be a non-empty array");
    std::vector<SpinOrbital> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(orbital_from_json(arr[i], name + "[" + std::to_string(i) + "]"));
    }
    return out;
  };
  f.basis.core = read_basis(j["core_basis"], "core_basis");
  f.basis.valence = read_basis(j["valence_basis"], "valence_basis");
  const auto nv = static_cast<Eigen::Index>(f.basis.valence.size());
  f.basis.frame = j.value("valence_frame", std::string("spherical")) == "cubic"
                      ? ValenceFrame::cubic
                      : ValenceFrame::spherical;
  f.basis.valence_transform = CMatrix::Identity(nv, nv);
  try {
    f.basis.validate();
  } catch (const DomainError& e) {
    throw DataError(std::string("invalid basis: ") + e.what());
  }
  f.radial_integral = number_from_json(j.value("radial_integral", json(1.0)), "radial_integral");
  if (!std::isfinite(f.radial_integral)) throw DataError("radial_integral must be finite");

  const auto nc = static_cast<Eigen::Index>(f.basis.core.size());
  const auto& mats = j["matrices"];
  for (const char* key : {"eps_i", "eps_s"}) {
    if (!mats.contains(key)) throw DataError(std::string("matrices is missing \"") + key + "\"");
  }
  f.eps_i.entries = matrix_from_json(mats["eps_i"], nc, nv, "eps_i");
  f.eps_s.entries = matrix_from_json(mats["eps_s"], nc, nv, "eps_s");
  f.eps_i.radial_integral = f.eps_s.radial_integral = f.radial_integral;
  if (j.contains("polarizations")) {
    f.eps_i.polarization = vector_from_json(j["polarizations"].at("eps_i"), "polarizations.eps_i");
    f.eps_s.polarization = vector_from_json(j["polarizations"].at("eps_s"), "polarizations.eps_s");
  }
  if (j.contains("cartesian")) {
    std::array<CMatrix, 3> cart;
    const char* axes[] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
      if (!j["cartesian"].contains(axes[a])) {
        throw DataError(std::string("cartesian is missing \"") + axes[a] + "\"");
      }
      cart[a] = matrix_from_json(j["cartesian"][axes[a]], nc, nv, std::string("cartesian.") + axes[a]);
    }
    f.cartesian = cart;
  }
  return f;
}

DipoleFile load_dipole_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dipole file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_dipole_json(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_dipole_matrix(const std::filesystem::path& path, const DipoleFile& file) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dipole file " + path.string());
  out << dump_dipole_json(file);
}

}  // namespace qfi::angular
