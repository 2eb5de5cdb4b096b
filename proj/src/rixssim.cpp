#include "qfi_rixs/rixssim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qfi_rixs/parallel.hpp"

namespace qfi::rixssim {

namespace {

constexpr int kCoreDim = 6;
constexpr std::array<int, 5> kDefaultOrbitalOrder = {2, 0, -2, 1, -1};

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::array<CMatrix, 3> spin_half() {
  CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 0.5, 0.5, 0;
  sy << 0, cplx(0, -0.5), cplx(0, 0.5), 0;
  sz << 0.5, 0, 0, -0.5;
  return {sx, sy, sz};
}

// Orbital angular momentum l = 1 in the m = -1, 0, 1 basis.
std::array<CMatrix, 3> orbital_p() {
  CMatrix lp = CMatrix::Zero(3, 3);
  lp(1, 0) = std::sqrt(2.0);
  lp(2, 1) = std::sqrt(2.0);
  const CMatrix lm = lp.adjoint();
  CMatrix lz = CMatrix::Zero(3, 3);
  lz(0, 0) = -1;
  lz(2, 2) = 1;
  return {0.5 * (lp + lm), cplx(0, -0.5) * (lp - lm), lz};
}

std::size_t product(const std::vector<int>& dims) {
  std::size_t p = 1;
  for (int d : dims) p *= static_cast<std::size_t>(d);
  return p;
}

std::vector<std::size_t> strides(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (int j = static_cast<int>(dims.size()) - 2; j >= 0; --j) {
    s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j) + 1] *
                                     static_cast<std::size_t>(dims[static_cast<std::size_t>(j) + 1]);
  }
  return s;
}

void add_one_site(CMatrix& h, const std::vector<int>& dims, int site, const CMatrix& op) {
  const auto st = strides(dims);
  const std::size_t dim = product(dims);
  const auto s = static_cast<std::size_t>(site);
  const auto d = static_cast<std::size_t>(dims[s]);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const std::size_t a = (idx / st[s]) % d;
    const std::size_t base = idx - a * st[s];
    for (std::size_t ap = 0; ap < d; ++ap) {
      const cplx v = op(static_cast<Eigen::Index>(ap), static_cast<Eigen::Index>(a));
      if (v != 0.0) h(static_cast<Eigen::Index>(base + ap * st[s]), static_cast<Eigen::Index>(idx)) += v;
    }
  }
}

// `op` acts on the pair (site i, site j) with row/column index a_i * d_j + a_j.
void add_two_site(CMatrix& h, const std::vector<int>& dims, int i, int j, const CMatrix& op) {
  const auto st = strides(dims);
  const std::size_t dim = product(dims);
  const auto si = static_cast<std::size_t>(i);
  const auto sj = static_cast<std::size_t>(j);
  const auto di = static_cast<std::size_t>(dims[si]);
  const auto dj = static_cast<std::size_t>(dims[sj]);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const std::size_t a = (idx / st[si]) % di;
    const std::size_t b = (idx / st[sj]) % dj;
    const std::size_t base = idx - a * st[si] - b * st[sj];
    const auto col = static_cast<Eigen::Index>(a * dj + b);
    for (std::size_t ap = 0; ap < di; ++ap) {
      for (std::size_t bp = 0; bp < dj; ++bp) {
        const cplx v = op(static_cast<Eigen::Index>(ap * dj + bp), col);
        if (v != 0.0) {
          h(static_cast<Eigen::Index>(base + ap * st[si] + bp * st[sj]), static_cast<Eigen::Index>(idx)) += v;
        }
      }
    }
  }
}

void write_le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  out.write(bytes, 8);
}

bool read_le(std::istream& in, double& v) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

ClusterModel::ClusterModel(manybody::LatticeSpec lattice, ClusterParams params,
                           std::size_t sector_cap)
    : lattice_(std::move(lattice)), params_(std::move(params)), sector_cap_(sector_cap) {
  lattice_.validate();
  if (lattice_.n_orb > 5) throw ConfigError("cluster models support at most the five 3d orbitals");
  if (!(params_.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (params_.orbitals.empty()) {
    orbitals_.assign(kDefaultOrbitalOrder.begin(), kDefaultOrbitalOrder.begin() + lattice_.n_orb);
  } else {
    orbitals_ = params_.orbitals;
    if (static_cast<int>(orbitals_.size()) != lattice_.n_orb) {
      throw ConfigError("orbitals must list exactly n_orb entries");
    }
    for (int o : orbitals_) {
      if (o < -2 || o > 2) throw ConfigError("orbital index must lie in -2..2");
      if (std::count(orbitals_.begin(), orbitals_.end(), o) > 1) {
        throw ConfigError("orbitals must be distinct");
      }
    }
  }
  if (!params_.delta_cf.empty() && static_cast<int>(params_.delta_cf.size()) != lattice_.n_orb) {
    throw ConfigError("delta_cf must list one splitting per orbital");
  }
  const int n = lattice_.n_sites;
  for (int j = 0; j + 1 < n; ++j) bonds_.emplace_back(j, j + 1);
  if (params_.periodic && n > 2) bonds_.emplace_back(n - 1, 0);
}

std::vector<int> ClusterModel::sector_dims(std::optional<int> core_site) const {
  std::vector<int> dims(static_cast<std::size_t>(lattice_.n_sites), lattice_.local_dim());
  if (core_site) dims.at(static_cast<std::size_t>(*core_site)) = kCoreDim;
  return dims;
}

namespace {

struct LocalTerms {
  CMatrix one_site;  // crystal field + Zeeman
  CMatrix bond;      // two-site exchange
  CMatrix orbital0;  // occupation of the first active orbital
  CMatrix core;      // core-hole site energy
};

LocalTerms local_terms(const ClusterModel& m) {
  const auto& p = m.params();
  const int no = m.lattice().n_orb;
  const auto s = spin_half();
  const CMatrix id_orb = CMatrix::Identity(no, no);
  const CMatrix id_spin = CMatrix::Identity(2, 2);

  LocalTerms t;
  CMatrix cf = CMatrix::Zero(no, no);
  for (int l = 0; l < no && !p.delta_cf.empty(); ++l) cf(l, l) = p.delta_cf[static_cast<std::size_t>(l)];
  t.one_site = kron(id_spin, cf);
  for (int a = 0; a < 3; ++a) t.one_site += p.field[a] * kron(s[a], id_orb);

  // Pair index (s_i n_orb + o_i) * d + (s_j n_orb + o_j); the orbital part is
  // the identity (J_s) or the label swap (J_so).
  const int d = 2 * no;
  t.bond = CMatrix::Zero(d * d, d * d);
  for (int si = 0; si < 2; ++si)
    for (int oi = 0; oi < no; ++oi)
      for (int sj = 0; sj < 2; ++sj)
        for (int oj = 0; oj < no; ++oj)
          for (int ti = 0; ti < 2; ++ti)
            for (int pi = 0; pi < no; ++pi)
              for (int tj = 0; tj < 2; ++tj)
                for (int pj = 0; pj < no; ++pj) {
                  cplx ss = 0.0;
                  for (int a = 0; a < 3; ++a) ss += s[a](si, ti) * s[a](sj, tj);
                  const double orb = p.J_s * (oi == pi && oj == pj) + p.J_so * (oi == pj && oj == pi);
                  if (ss == 0.0 || orb == 0.0) continue;
                  t.bond((si * no + oi) * d + sj * no + oj, (ti * no + pi) * d + tj * no + pj) += ss * orb;
                }

  CMatrix e00 = CMatrix::Zero(no, no);
  e00(0, 0) = 1.0;
  t.orbital0 = kron(id_spin, e00);

  const auto l = orbital_p();
  t.core = p.E_edge * CMatrix::Identity(kCoreDim, kCoreDim);
  for (int a = 0; a < 3; ++a) t.core += p.xi_c * kron(s[a], l[a]);
  return t;
}

}  // namespace

CMatrix ClusterModel::valence_hamiltonian() const {
  const auto dims = sector_dims(std::nullopt);
  const std::size_t dim = product(dims);
  if (dim > sector_cap_) {
    throw ResourceError("valence sector dimension " + std::to_string(dim) + " exceeds the cap of " +
                        std::to_string(sector_cap_));
  }
  const auto t = local_terms(*this);
  CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (int j = 0; j < lattice_.n_sites; ++j) add_one_site(h, dims, j, t.one_site);
  for (const auto& [i, j] : bonds_) add_two_site(h, dims, i, j, t.bond);
  return 0.5 * (h + h.adjoint());
}

CMatrix ClusterModel::intermediate_hamiltonian(int core_site) const {
  if (core_site < 0 || core_site >= lattice_.n_sites) throw DomainError("core site out of range");
  const auto dims = sector_dims(core_site);
  const std::size_t dim = product(dims);
  if (dim > sector_cap_) {
    throw ResourceError("core-hole sector dimension " + std::to_string(dim) +
                        " exceeds the cap of " + std::to_string(sector_cap_));
  }
  const auto t = local_terms(*this);
  CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (int j = 0; j < lattice_.n_sites; ++j) {
    add_one_site(h, dims, j, j == core_site ? t.core : t.one_site);
  }
  for (const auto& [i, j] : bonds_) {
    if (i == core_site) {
      add_one_site(h, dims, j, params_.U_c * t.orbital0);
    } else if (j == core_site) {
      add_one_site(h, dims, i, params_.U_c * t.orbital0);
    } else {
      add_two_site(h, dims, i, j, t.bond);
    }
  }
  return 0.5 * (h + h.adjoint());
}

angular::DipoleMatrix ClusterModel::dipole(const geometry::PolarizationVector& eps) const {
  static const auto basis = angular::OrbitalBasis::l_edge_3d(angular::ValenceFrame::cubic);
  std::vector<int> cols;
  for (int s = 0; s < 2; ++s) {
    for (int o : orbitals_) cols.push_back(s * 5 + o + 2);
  }
  return angular::restrict_valence(angular::dipole_matrix(eps, basis), cols);
}

std::string ClusterModel::describe() const {
  nlohmann::json j{{"n_sites", lattice_.n_sites},
                   {"n_orb", lattice_.n_orb},
                   {"site_positions", lattice_.site_positions},
                   {"J_s", params_.J_s},
                   {"J_so", params_.J_so},
                   {"delta_cf", params_.delta_cf},
                   {"field", {params_.field.x(), params_.field.y(), params_.field.z()}},
                   {"E_edge", params_.E_edge},
                   {"xi_c", params_.xi_c},
                   {"U_c", params_.U_c},
                   {"periodic", params_.periodic},
                   {"orbitals", orbitals_}};
  return j.dump();
}

SpectralDecomposition diagonalize(const ClusterModel& model, std::optional<int> core_site) {
  const CMatrix h = core_site ? model.intermediate_hamiltonian(*core_site) : model.valence_hamiltonian();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw DomainError("Hermitian eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

ModelDecompositions decompose(const ClusterModel& model, unsigned threads) {
  const int n = model.lattice().n_sites;
  std::vector<SpectralDecomposition> all(static_cast<std::size_t>(n) + 1);
  parallel_for(all.size(), threads, [&](std::size_t i) {
    all[i] = i == 0 ? diagonalize(model, std::nullopt) : diagonalize(model, static_cast<int>(i) - 1);
  });
  ModelDecompositions d;
  d.valence = std::move(all[0]);
  d.core.assign(std::make_move_iterator(all.begin() + 1), std::make_move_iterator(all.end()));
  return d;
}

namespace {

void check_dipoles(const ClusterModel& model, const ModelDecompositions& decomp,
                   const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s) {
  const int d = model.lattice().local_dim();
  for (const auto* m : {&m_i, &m_s}) {
    if (m->entries.rows() != kCoreDim || m->entries.cols() != d) {
      throw DomainError("dipole matrix must be 6 x " + std::to_string(d) + " for this model");
    }
  }
  if (static_cast<int>(decomp.core.size()) != model.lattice().n_sites ||
      decomp.valence.eigenvalues.size() == 0) {
    throw std::logic_error("missing spectral decomposition for a sector");
  }
}

}  // namespace

CVector final_state(const ClusterModel& model, const ModelDecompositions& decomp,
                    const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s,
                    double q_chain, double omega_in, double gamma) {
  check_dipoles(model, decomp, m_i, m_s);
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const auto& lat = model.lattice();
  const CVector g = decomp.valence.ground_state();
  const double eg = decomp.valence.ground_energy();
  const auto vdims = model.sector_dims(std::nullopt);
  const CMatrix ms_dag = m_s.entries.adjoint();
  CVector out = CVector::Zero(g.size());
  for (int j = 0; j < lat.n_sites; ++j) {
    const auto cdims = model.sector_dims(j);
    const CVector excited = manybody::apply_local(g, vdims, j, m_i.entries);
    const auto& sec = decomp.core[static_cast<std::size_t>(j)];
    CVector coeff = sec.eigenvectors.adjoint() * excited;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
      coeff[k] /= cplx(sec.eigenvalues[k] - eg - omega_in, -gamma);
    }
    const CVector propagated = sec.eigenvectors * coeff;
    const cplx ph = std::polar(1.0, q_chain * lat.site_positions[static_cast<std::size_t>(j)]);
    out += ph * manybody::apply_local(propagated, cdims, j, ms_dag);
  }
  return out;
}

CVector ucl_final_state(const ClusterModel& model, const ModelDecompositions& decomp,
                        const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s,
                        double q_chain, double gamma) {
  check_dipoles(model, decomp, m_i, m_s);
  const CMatrix t = m_s.entries.adjoint() * m_i.entries;
  return (kI / gamma) * manybody::apply_t_q(decomp.valence.ground_state(), model.lattice(), t, q_chain);
}

// ---------------------------------------------------------------------------

double Spectrum::total_weight() const {
  if (kind == SpectrumKind::poles) {
    double s = 0.0;
    for (const auto& p : poles) s += p.weight;
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    s += 0.5 * (samples[i].intensity + samples[i - 1].intensity) *
         (samples[i].omega - samples[i - 1].omega);
  }
  return s;
}

double Spectrum::stokes_weight() const {
  if (kind == SpectrumKind::poles) {
    double s = 0.0;
    for (const auto& p : poles) {
      if (p.omega > omega_cut) s += p.weight;
    }
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    double x0 = samples[i - 1].omega;
    double y0 = samples[i - 1].intensity;
    const double x1 = samples[i].omega;
    const double y1 = samples[i].intensity;
    if (x1 <= 0.0) continue;
    if (x0 < 0.0) {
      // Interpolate the intensity at omega = 0.
      y0 = y0 + (y1 - y0) * (0.0 - x0) / (x1 - x0);
      x0 = 0.0;
    }
    s += 0.5 * (y0 + y1) * (x1 - x0);
  }
  return s;
}

Spectrum spectrum(const CVector& final, const SpectralDecomposition& valence, SpectrumMeta meta) {
  if (final.size() != valence.eigenvectors.rows()) {
    throw DomainError("final state does not match the valence sector");
  }
  Spectrum s;
  s.kind = SpectrumKind::poles;
  s.meta = std::move(meta);
  const double eg = valence.ground_energy();
  s.omega_cut = 1e-9 * valence.bandwidth();
  const CVector amp = valence.eigenvectors.adjoint() * final;
  s.poles.reserve(static_cast<std::size_t>(amp.size()));
  for (Eigen::Index n = 0; n < amp.size(); ++n) {
    s.poles.push_back({valence.eigenvalues[n] - eg, std::norm(amp[n])});
  }
  std::stable_sort(s.poles.begin(), s.poles.end(),
                   [](const Pole& a, const Pole& b) { return a.omega < b.omega; });
  s.ground_degeneracy = 0;
  for (const auto& p : s.poles) {
    if (p.omega <= s.omega_cut) ++s.ground_degeneracy;
  }
  static std::atomic<bool> warned{false};
  if (s.ground_degeneracy > 1 && !warned.exchange(true)) {
    std::cerr << "warning: ground state is " << s.ground_degeneracy
              << "-fold degenerate; all elastic poles are excluded from Stokes sums\n";
  }
  return s;
}

double stokes_integral(const Spectrum& spec, double gamma) {
  return gamma * gamma * spec.stokes_weight();
}

void check_conjugate_pair(const Spectrum& fwd, const Spectrum& rev, double gamma) {
  const auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  for (const auto* s : {&fwd, &rev}) {
    if (s->has_meta && s->meta.gamma > 0.0 && !close(s->meta.gamma, gamma)) {
      throw DomainError("gamma mismatch: spectrum metadata has " + format_double(s->meta.gamma) +
                        " but " + format_double(gamma) + " was requested");
    }
  }
  if (!fwd.has_meta || !rev.has_meta) return;
  if (!close(fwd.meta.gamma, rev.meta.gamma)) {
    throw DomainError("gamma mismatch between the spectrum pair");
  }
  if (!close(fwd.meta.q_chain, -rev.meta.q_chain)) {
    throw DomainError("reverse spectrum must be measured at -q (got q = " +
                      format_double(fwd.meta.q_chain) + " and " + format_double(rev.meta.q_chain) + ")");
  }
  if (fwd.meta.eps_i != rev.meta.eps_s || fwd.meta.eps_s != rev.meta.eps_i) {
    throw DomainError("reverse spectrum must swap the polarizations (got " + fwd.meta.eps_i + "-" +
                      fwd.meta.eps_s + " and " + rev.meta.eps_i + "-" + rev.meta.eps_s + ")");
  }
}

double qfi_from_spectra(const Spectrum& fwd, const Spectrum& rev, double gamma) {
  check_conjugate_pair(fwd, rev, gamma);
  return 2.0 * gamma * gamma * (fwd.stokes_weight() + rev.stokes_weight());
}

Spectrum mixed_spectrum(std::span<const Spectrum> specs, std::span<const double> weights) {
  if (specs.empty() || specs.size() != weights.size()) {
    throw DomainError("mixed_spectrum needs one weight per spectrum");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("mixing weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("mixing weights must sum to 1");
  const auto& ref = specs[0];
  Spectrum out;
  out.kind = ref.kind;
  out.meta = ref.meta;
  out.meta.eps_i = "mixed";
  out.meta.eps_s = "mixed";
  out.has_meta = ref.has_meta;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& s = specs[c];
    if (s.kind != ref.kind) throw DomainError("cannot mix pole and sampled spectra");
    if (s.has_meta && ref.has_meta &&
        (s.meta.q_chain != ref.meta.q_chain || s.meta.omega_in != ref.meta.omega_in ||
         s.meta.gamma != ref.meta.gamma)) {
      throw DomainError("mixed spectra must share q, omega_in and gamma");
    }
    out.omega_cut = std::max(out.omega_cut, s.omega_cut);
    out.ground_degeneracy = std::max(out.ground_degeneracy, s.ground_degeneracy);
    if (s.kind == SpectrumKind::poles) {
      for (const auto& p : s.poles) out.poles.push_back({p.omega, weights[c] * p.weight});
    } else {
      if (s.samples.size() != ref.samples.size()) throw DomainError("sampled spectra need one grid");
      if (out.samples.empty()) {
        out.samples = s.samples;
        for (auto& x : out.samples) x.intensity = 0.0;
      }
      for (std::size_t i = 0; i < s.samples.size(); ++i) {
        if (s.samples[i].omega != ref.samples[i].omega) throw DomainError("sampled spectra need one grid");
        out.samples[i].intensity += weights[c] * s.samples[i].intensity;
      }
    }
  }
  std::stable_sort(out.poles.begin(), out.poles.end(),
                   [](const Pole& a, const Pole& b) { return a.omega < b.omega; });
  return out;
}

Spectrum broaden(const Spectrum& spec, double eta, double omega_min, double omega_max,
                 std::size_t points) {
  if (spec.kind != SpectrumKind::poles) throw DomainError("only pole spectra can be broadened");
  if (!(eta > 0.0) || points < 2 || !(omega_max > omega_min)) {
    throw DomainError("invalid broadening grid");
  }
  Spectrum out;
  out.kind = SpectrumKind::sampled;
  out.meta = spec.meta;
  out.has_meta = spec.has_meta;
  out.samples.resize(points);
  const double step = (omega_max - omega_min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double w = omega_min + step * static_cast<double>(i);
    double v = 0.0;
    for (const auto& p : spec.poles) {
      const double x = w - p.omega;
      v += p.weight * (eta / kPi) / (x * x + eta * eta);
    }
    out.samples[i] = {w, v};
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spec) {
  if (spec.kind == SpectrumKind::poles) {
    out << "# poles\nomega,weight\n";
    for (const auto& p : spec.poles) out << format_double(p.omega) << ',' << format_double(p.weight) << '\n';
  } else {
    out << "omega,intensity\n";
    for (const auto& s : spec.samples) {
      out << format_double(s.omega) << ',' << format_double(s.intensity) << '\n';
    }
  }
}

std::string spectrum_meta_json(const Spectrum& spec) {
  nlohmann::ordered_json j;
  j["q_chain"] = spec.meta.q_chain;
  j["eps_i"] = spec.meta.eps_i;
  j["eps_s"] = spec.meta.eps_s;
  j["omega_in"] = spec.meta.omega_in;
  j["gamma"] = spec.meta.gamma;
  j["omega_cut"] = spec.omega_cut;
  return j.dump(2) + "\n";
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

void save_spectrum(const std::filesystem::path& csv, const Spectrum& spec) {
  std::ofstream out(csv);
  if (!out) throw DataError("cannot write spectrum " + csv.string());
  write_spectrum_csv(out, spec);
  std::ofstream meta(sidecar_path(csv));
  if (!meta) throw DataError("cannot write spectrum metadata for " + csv.string());
  meta << spectrum_meta_json(spec);
}

void save_decomposition(const std::filesystem::path& path, const SpectralDecomposition& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write decomposition cache " + path.string());
  write_le(out, static_cast<double>(d.eigenvalues.size()));
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) write_le(out, d.eigenvalues[i]);
  for (Eigen::Index c = 0; c < d.eigenvectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < d.eigenvectors.rows(); ++r) {
      write_le(out, d.eigenvectors(r, c).real());
      write_le(out, d.eigenvectors(r, c).imag());
    }
  }
}

std::optional<SpectralDecomposition> load_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  double n_d = 0.0;
  if (!read_le(in, n_d) || n_d < 1 || n_d > 1e6) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(n_d);
  SpectralDecomposition d{RVector(n), CMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!read_le(in, d.eigenvalues[i])) return std::nullopt;
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      double re = 0.0;
      double im = 0.0;
      if (!read_le(in, re) || !read_le(in, im)) return std::nullopt;
      d.eigenvectors(r, c) = {re, im};
    }
  }
  return d;
}

}  // namespace qfi::rixssim
