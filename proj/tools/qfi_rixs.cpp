// qfi-rixs: entanglement witnesses from polarization-resolved RIXS.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 resource cap,
// 5 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qfi_rixs/angular.hpp"
#include "qfi_rixs/bounds.hpp"
#include "qfi_rixs/geometry.hpp"
#include "qfi_rixs/manybody.hpp"
#include "qfi_rixs/rixssim.hpp"
#include "qfi_rixs/scattering.hpp"
#include "qfi_rixs/verify.hpp"
#include "qfi_rixs/witness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qfi;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kResource = 4, kVerify = 5 };

struct Flags {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 20240611;
  unsigned threads = 0;
  int grid = 0;
  std::string channels;
  std::string ks;
  std::optional<double> gamma;
  std::string dipole_file;
  bool svg = false;
  std::string inject_fault;
};

json load_config(const Flags& f) {
  if (f.config.empty()) return json::object();
  if (!fs::exists(f.config)) throw ConfigError("config file not found: " + f.config);
  std::ifstream in(f.config);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config " + f.config + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_ks(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s)) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("--k expects integers, got \"" + item + "\"");
    }
  }
  return out;
}

geometry::BeamGeometry read_geometry(const json& cfg) {
  const json g = get_or(cfg, "geometry", json::object());
  return geometry::BeamGeometry::from_degrees(get_or(g, "theta_i_deg", 45.0), get_or(g, "theta_s_deg", 45.0),
                                              get_or(g, "phi_deg", 0.0), get_or(g, "k_in", 1.0),
                                              get_or(g, "k_out", 1.0));
}

Vec3 read_lattice_direction(const json& cfg) {
  const json g = get_or(cfg, "geometry", json::object());
  const auto v = get_or(g, "lattice_direction", std::vector<double>{1.0, 0.0, 0.0});
  if (v.size() != 3) throw ConfigError("lattice_direction needs three components");
  const Vec3 d(v[0], v[1], v[2]);
  if (std::abs(d.norm() - 1.0) > 1e-12) throw ConfigError("lattice_direction must be a unit vector");
  return d;
}

std::string describe_geometry(const json& cfg) {
  const json g = get_or(cfg, "geometry", json::object());
  return "theta_i=" + format_double(get_or(g, "theta_i_deg", 45.0)) +
         " theta_s=" + format_double(get_or(g, "theta_s_deg", 45.0)) +
         " phi=" + format_double(get_or(g, "phi_deg", 0.0)) + " deg";
}

angular::ValenceFrame read_frame(const json& cfg) {
  const auto f = get_or<std::string>(cfg, "valence_frame", "spherical");
  if (f == "spherical") return angular::ValenceFrame::spherical;
  if (f == "cubic") return angular::ValenceFrame::cubic;
  throw ConfigError("valence_frame must be \"spherical\" or \"cubic\"");
}

std::string dipole_path(const json& cfg, const Flags& f) {
  return f.dipole_file.empty() ? get_or<std::string>(cfg, "dipole_file", "") : f.dipole_file;
}

bounds::DipoleSource read_source(const json& cfg, const Flags& f) {
  const auto path = dipole_path(cfg, f);
  if (!path.empty()) {
    if (!fs::exists(path)) throw ConfigError("dipole file not found: " + path);
    auto file = angular::load_dipole_matrix(path);
    if (!file.cartesian) {
      throw DataError(path + ": angular sweeps need the \"cartesian\" matrices (x, y, z)");
    }
    return bounds::DipoleSource::cartesian(*file.cartesian, file.radial_integral);
  }
  return bounds::DipoleSource::atomic(angular::OrbitalBasis::l_edge_3d(read_frame(cfg)),
                                      get_or(cfg, "radial_integral", 1.0));
}

cplx read_complex(const json& j, const char* key) {
  const auto v = get_or(j, key, std::vector<double>{0.0, 0.0});
  if (v.size() != 2) throw ConfigError(std::string(key) + " must be [re, im]");
  return {v[0], v[1]};
}

void ensure_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::vector<double> sites_from(const json& j, int n_default) {
  if (j.contains("site_positions")) return get_or(j, "site_positions", std::vector<double>{});
  const int n = get_or(j, "n_sites", n_default);
  if (n < 1) throw ConfigError("n_sites must be >= 1");
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
  return s;
}

// --------------------------------------------------------------------- dipole

int cmd_dipole(const Flags& f) {
  const json cfg = load_config(f);
  const auto geom = read_geometry(cfg);
  const auto channel = bounds::parse_channel(get_or<std::string>(cfg, "channel", "pi-pi"));
  const auto path = dipole_path(cfg, f);
  if (!path.empty() && !fs::exists(path)) throw ConfigError("dipole file not found: " + path);
  ensure_dir(f.out);

  angular::DipoleFile file;
  if (!path.empty()) {
    file = angular::load_dipole_matrix(path);
  } else {
    const auto basis = angular::OrbitalBasis::l_edge_3d(read_frame(cfg));
    const double radial = get_or(cfg, "radial_integral", 1.0);
    const auto [li, ls] = bounds::channel_labels(channel);
    const auto ei = geometry::polarization_vector(geom, geometry::Beam::incident, li);
    const auto es = geometry::polarization_vector(geom, geometry::Beam::scattered, ls);
    file.basis = basis;
    file.radial_integral = radial;
    file.eps_i = angular::dipole_matrix(ei, basis, radial);
    file.eps_s = angular::dipole_matrix(es, basis, radial);
    std::array<CMatrix, 3> cart;
    for (int a = 0; a < 3; ++a) {
      cart[a] = angular::dipole_matrix(geometry::PolarizationVector(Vec3::Unit(a).cast<cplx>()), basis, radial).entries;
    }
    file.cartesian = cart;
  }
  const fs::path out = fs::path(f.out) / "dipole.json";
  angular::save_dipole_matrix(out, file);
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

// --------------------------------------------------------------------- bounds

int cmd_bounds(const Flags& f) {
  const json cfg = load_config(f);
  const json b = get_or(cfg, "bounds", json::object());
  bounds::SweepSpec spec;
  spec.grid = f.grid > 0 ? f.grid : get_or(b, "grid", 50);
  const auto channel_names = !f.channels.empty() ? split(f.channels)
                                                 : get_or(b, "channels", std::vector<std::string>{"pi-pi", "pi-sigma"});
  spec.channels.clear();
  for (const auto& c : channel_names) spec.channels.push_back(bounds::parse_channel(c));
  spec.ks = !f.ks.empty() ? parse_ks(f.ks) : get_or(b, "k", std::vector<int>{1});
  int k_max = 1;
  for (int k : spec.ks) k_max = std::max(k_max, k);
  spec.site_positions = sites_from(b, k_max);
  spec.t_sq = read_complex(b, "t_sq");
  spec.lattice_direction = read_lattice_direction(cfg);
  // The sweep covers all angles, but a malformed geometry block is still an error.
  (void)read_geometry(cfg);
  const json g = get_or(cfg, "geometry", json::object());
  const double phi_deg = get_or(g, "phi_deg", 0.0);
  if (phi_deg < 0.0 || phi_deg >= 360.0) throw ConfigError("phi_deg must lie in [0, 360)");
  spec.phi = phi_deg * kPi / 180.0;
  spec.k_in = get_or(g, "k_in", 1.0);
  spec.k_out = get_or(g, "k_out", 1.0);
  spec.threads = f.threads;
  spec.source = read_source(cfg, f);
  ensure_dir(f.out);

  const auto rows = bounds::angular_sweep(spec);
  const fs::path csv = fs::path(f.out) / "bounds.csv";
  std::ofstream out(csv);
  if (!out) throw DataError("cannot write " + csv.string());
  bounds::write_sweep_csv(out, rows);
  std::cout << "wrote " << csv.string() << " (" << rows.size() << " rows)\n";
  if (f.svg || get_or(b, "svg", false)) {
    for (auto c : spec.channels) {
      for (int k : spec.ks) {
        const fs::path svg = fs::path(f.out) / ("bounds_" + bounds::channel_name(c) + "_k" + std::to_string(k) + ".svg");
        write_text(svg, bounds::render_svg(rows, c, k));
      }
    }
  }
  return kOk;
}

// ------------------------------------------------------------------- simulate

rixssim::ClusterModel read_model(const json& cfg, std::uint64_t seed) {
  const json m = get_or(cfg, "model", json::object());
  const int n = get_or(m, "n_sites", 2);
  const int n_orb = get_or(m, "n_orb", 2);
  if (n < 1 || n_orb < 1) throw ConfigError("model needs n_sites >= 1 and n_orb >= 1");
  if (get_or(m, "random", false)) {
    std::mt19937_64 rng(seed);
    return verify::random_ring_model(n, n_orb, rng);
  }
  rixssim::ClusterParams p;
  p.J_s = get_or(m, "J_s", p.J_s);
  p.J_so = get_or(m, "J_so", p.J_so);
  // A small crystal-field ladder keeps the default ground state orbitally nondegenerate.
  std::vector<double> cf_default(static_cast<std::size_t>(n_orb));
  for (int l = 0; l < n_orb; ++l) cf_default[static_cast<std::size_t>(l)] = 0.25 * l;
  p.delta_cf = get_or(m, "delta_cf", cf_default);
  const auto field = get_or(m, "field", std::vector<double>{p.field.x(), p.field.y(), p.field.z()});
  if (field.size() != 3) throw ConfigError("field needs three components");
  p.field = Vec3(field[0], field[1], field[2]);
  p.E_edge = get_or(m, "E_edge", p.E_edge);
  p.xi_c = get_or(m, "xi_c", p.xi_c);
  p.U_c = get_or(m, "U_c", p.U_c);
  p.gamma = get_or(m, "gamma", p.gamma);
  p.periodic = get_or(m, "periodic", p.periodic);
  p.orbitals = get_or(m, "orbitals", std::vector<int>{});
  auto lattice = manybody::LatticeSpec::chain(n, n_orb);
  if (m.contains("site_positions")) lattice.site_positions = get_or(m, "site_positions", std::vector<double>{});
  return rixssim::ClusterModel(lattice, p, get_or<std::size_t>(m, "sector_cap", rixssim::kDefaultSectorCap));
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

rixssim::ModelDecompositions cached_decompose(const rixssim::ClusterModel& model, unsigned threads) {
  const char* dir = std::getenv("QFI_RIXS_CACHE");
  if (!dir || !*dir) return rixssim::decompose(model, threads);
  fs::create_directories(dir);
  char key[32];
  std::snprintf(key, sizeof key, "%016llx", static_cast<unsigned long long>(fnv1a(model.describe())));
  const int n = model.lattice().n_sites;
  rixssim::ModelDecompositions d;
  bool complete = true;
  std::vector<rixssim::SpectralDecomposition> loaded;
  for (int s = -1; s < n && complete; ++s) {
    const auto p = fs::path(dir) / (std::string(key) + "_" + std::to_string(s) + ".bin");
    auto one = rixssim::load_decomposition(p);
    if (!one) complete = false;
    else loaded.push_back(std::move(*one));
  }
  if (complete) {
    d.valence = std::move(loaded[0]);
    d.core.assign(loaded.begin() + 1, loaded.end());
    return d;
  }
  d = rixssim::decompose(model, threads);
  rixssim::save_decomposition(fs::path(dir) / (std::string(key) + "_-1.bin"), d.valence);
  for (int s = 0; s < n; ++s) {
    rixssim::save_decomposition(fs::path(dir) / (std::string(key) + "_" + std::to_string(s) + ".bin"),
                                d.core[static_cast<std::size_t>(s)]);
  }
  return d;
}

int cmd_simulate(const Flags& f) {
  const json cfg = load_config(f);
  const json sim = get_or(cfg, "simulate", json::object());
  const auto model = read_model(cfg, f.seed);
  const auto geom = read_geometry(cfg);
  const auto lat_dir = read_lattice_direction(cfg);
  const double gamma = f.gamma ? *f.gamma : get_or(sim, "gamma", model.params().gamma);
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  const double q = sim.contains("q_chain") ? get_or(sim, "q_chain", 0.0)
                                           : geometry::momentum_transfer(geom, lat_dir).q_chain;
  const double omega_in = get_or(sim, "omega_in", model.params().E_edge);
  const bool ucl = get_or(sim, "ucl", false);
  const double eta_rel = get_or(sim, "broadening", 0.01);
  const auto grid_points = get_or<std::size_t>(sim, "grid_points", 4001);
  std::vector<std::string> channel_names = !f.channels.empty() ? split(f.channels)
      : get_or(sim, "channels", std::vector<std::string>{"pi-pi", "pi-sigma", "sigma-pi", "sigma-sigma"});
  std::vector<bounds::Channel> channels;
  for (const auto& c : channel_names) {
    const auto ch = bounds::parse_channel(c);
    if (ch == bounds::Channel::mixed) throw ConfigError("simulate takes resolved channels only");
    channels.push_back(ch);
  }
  const auto weights = get_or(sim, "mixed_weights", std::vector<double>{});
  if (!weights.empty() && (weights.size() != 4 || channels.size() != 4)) {
    throw ConfigError("mixed_weights needs four weights and all four channels");
  }
  ensure_dir(f.out);

  const auto dec = cached_decompose(model, f.threads);
  const auto& lat = model.lattice();
  const manybody::ManyBodyState ground(dec.valence.ground_state(), lat);
  const double bw = dec.valence.bandwidth();

  json summary;
  summary["model"] = json::parse(model.describe());
  summary["gamma"] = gamma;
  summary["q_chain"] = q;
  summary["omega_in"] = omega_in;
  summary["ucl"] = ucl;
  summary["valence_dimension"] = dec.valence.eigenvalues.size();
  summary["ground_energy"] = dec.valence.ground_energy();
  summary["bandwidth"] = bw;
  summary["channels"] = json::object();

  std::vector<rixssim::Spectrum> forward;
  std::vector<scattering::TMatrix> ts;
  std::vector<double> phases;
  const auto label = [](geometry::PolLabel l) { return l == geometry::PolLabel::pi ? "pi" : "sigma"; };
  for (auto ch : channels) {
    const auto [li, ls] = bounds::channel_labels(ch);
    const auto mi = model.dipole(geometry::polarization_vector(geom, geometry::Beam::incident, li));
    const auto ms = model.dipole(geometry::polarization_vector(geom, geometry::Beam::scattered, ls));
    const auto psi_f = ucl ? rixssim::ucl_final_state(model, dec, mi, ms, q, gamma)
                           : rixssim::final_state(model, dec, mi, ms, q, omega_in, gamma);
    const auto psi_r = ucl ? rixssim::ucl_final_state(model, dec, ms, mi, -q, gamma)
                           : rixssim::final_state(model, dec, ms, mi, -q, omega_in, gamma);
    const auto fwd = rixssim::spectrum(psi_f, dec.valence, {q, label(li), label(ls), omega_in, gamma});
    const auto rev = rixssim::spectrum(psi_r, dec.valence, {-q, label(ls), label(li), omega_in, gamma});
    const std::string name = bounds::channel_name(ch);
    rixssim::save_spectrum(fs::path(f.out) / ("spectrum_" + name + "_fwd_poles.csv"), fwd);
    rixssim::save_spectrum(fs::path(f.out) / ("spectrum_" + name + "_rev_poles.csv"), rev);
    const double eta = eta_rel * std::max(bw, 1e-12);
    const double lo = -0.5 * bw - 20 * eta;
    const double hi = 1.5 * bw + 20 * eta;
    rixssim::save_spectrum(fs::path(f.out) / ("spectrum_" + name + "_fwd.csv"),
                           rixssim::broaden(fwd, eta, lo, hi, grid_points));
    rixssim::save_spectrum(fs::path(f.out) / ("spectrum_" + name + "_rev.csv"),
                           rixssim::broaden(rev, eta, lo, hi, grid_points));

    const auto t = scattering::t_matrix(mi, ms);
    const cplx t_sq = manybody::t_sq_expectation(ground, t, q);
    const double phase = scattering::optimal_phase(t_sq);
    const double oracle = manybody::qfi_pure(ground, t, q, phase);
    json bj = json::object();
    for (int k = 1; k <= lat.n_sites; ++k) {
      bj[std::to_string(k)] = bounds::k_producible_bound(t, q, lat.site_positions, phase, k).value;
    }
    summary["channels"][name] = {{"phase", phase},
                                 {"t_sq", {t_sq.real(), t_sq.imag()}},
                                 {"qfi_from_spectra", rixssim::qfi_from_spectra(fwd, rev, gamma)},
                                 {"qfi_ground_state", oracle},
                                 {"bounds_by_k", bj}};
    forward.push_back(fwd);
    ts.push_back(t);
    phases.push_back(phase);
  }
  if (!weights.empty()) {
    const auto mixed = rixssim::mixed_spectrum(forward, weights);
    rixssim::save_spectrum(fs::path(f.out) / "spectrum_mixed_poles.csv", mixed);
    json mj = json::object();
    for (int k = 1; k <= lat.n_sites; ++k) {
      const auto r = bounds::mixed_pol_bound(ts, q, lat.site_positions, phases, k);
      mj[std::to_string(k)] = {{"envelope", r.envelope_term}, {"offset", r.offset_term}, {"total", r.total}};
    }
    summary["mixed"] = {{"weights", weights},
                        {"integral", 4.0 * gamma * gamma * mixed.stokes_weight()},
                        {"bounds_by_k", mj}};
  }
  write_text(fs::path(f.out) / "simulation.json", summary.dump(2) + "\n");
  std::cout << "wrote spectra for " << channels.size() << " channel(s) to " << f.out << "\n";
  return kOk;
}

// -------------------------------------------------------------------- witness

int cmd_witness(const Flags& f) {
  const json cfg = load_config(f);
  const json w = get_or(cfg, "witness", json::object());
  const auto fwd_path = get_or<std::string>(w, "forward", "");
  const auto rev_path = get_or<std::string>(w, "reverse", "");
  const auto mixed_path = get_or<std::string>(w, "mixed", "");
  const bool mixed = !mixed_path.empty();
  if (!mixed && (fwd_path.empty() || rev_path.empty())) {
    throw ConfigError("witness needs \"forward\" and \"reverse\" spectra, or a \"mixed\" spectrum");
  }
  for (const auto& p : mixed ? std::vector<std::string>{mixed_path} : std::vector<std::string>{fwd_path, rev_path}) {
    if (!fs::exists(p)) throw ConfigError("spectrum file not found: " + p);
  }
  double gamma = f.gamma ? *f.gamma : get_or(w, "gamma", 0.0);
  if (!f.gamma && !w.contains("gamma")) {
    // Fall back to the sidecar metadata written next to simulated spectra.
    const auto first = witness::load_measured_spectrum(mixed ? mixed_path : fwd_path);
    if (first.has_meta) gamma = first.meta.gamma;
  }
  if (!(gamma > 0.0)) throw ConfigError("witness needs a positive gamma (--gamma, witness.gamma or spectrum metadata)");
  const auto geom = read_geometry(cfg);
  const std::vector<double> sites = sites_from(w, 1);
  const int n = static_cast<int>(sites.size());
  const double q = w.contains("q_chain") ? get_or(w, "q_chain", 0.0)
                                         : geometry::momentum_transfer(geom, read_lattice_direction(cfg)).q_chain;
  const cplx t_sq = read_complex(w, "t_sq");
  const auto bounds_file = get_or<std::string>(w, "bounds_file", "");
  json bounds_json;
  if (!bounds_file.empty()) {
    if (!fs::exists(bounds_file)) throw ConfigError("bounds file not found: " + bounds_file);
    std::ifstream in(bounds_file);
    try {
      bounds_json = json::parse(in);
    } catch (const json::parse_error& e) {
      throw DataError(bounds_file + ": " + e.what());
    }
  }
  const auto source = bounds_file.empty() ? read_source(cfg, f)
                                          : bounds::DipoleSource::atomic(angular::OrbitalBasis::l_edge_3d());
  ensure_dir(f.out);

  witness::WitnessReport report;
  if (!mixed) {
    const auto fwd = witness::load_measured_spectrum(fwd_path);
    const auto rev = witness::load_measured_spectrum(rev_path);
    const double fq = witness::measured_qfi(fwd, rev, gamma);
    std::function<double(int)> bound;
    if (!bounds_file.empty()) {
      const auto ch = get_or<std::string>(w, "channel", "pi-sigma");
      const json bj = bounds_json.at("channels").at(ch).at("bounds_by_k");
      bound = [bj](int k) { return bj.at(std::to_string(k)).get<double>(); };
    } else {
      const auto ch = bounds::parse_channel(get_or<std::string>(w, "channel", "pi-sigma"));
      const auto t = bounds::channel_t_matrix(source, geom, ch);
      const double phase = scattering::optimal_phase(t_sq);
      bound = [=](int k) { return bounds::k_producible_bound(t, q, sites, phase, k).value; };
    }
    const int n_eff = bounds_file.empty() ? n : get_or(bounds_json.at("model"), "n_sites", n);
    report = witness::certify(fq, bound, n_eff);
    report.inputs.files = {fwd_path, rev_path};
    for (const auto* s : {&fwd, &rev}) {
      if (s->clipped > 0) report.notes.push_back(std::to_string(s->clipped) + " negative intensities clipped");
      if (const auto r = witness::refinement_check(*s); r && r->flagged) {
        report.notes.push_back("half-grid integral differs by more than 1%; refine the energy grid");
      }
    }
  } else {
    const auto spec = witness::load_measured_spectrum(mixed_path);
    const double integral = witness::mixed_integral(spec, gamma);
    std::function<double(int)> bound;
    double offset = 0.0;
    int n_eff = n;
    if (!bounds_file.empty()) {
      const json mj = bounds_json.at("mixed").at("bounds_by_k");
      bound = [mj](int k) { return mj.at(std::to_string(k)).at("total").get<double>(); };
      offset = mj.at("1").at("offset").get<double>();
      n_eff = get_or(bounds_json.at("model"), "n_sites", n);
    } else {
      const auto set = bounds::channel_t_set(source, geom);
      const double phase = scattering::optimal_phase(t_sq);
      const std::array<double, 4> phases{phase, phase, phase, phase};
      bound = [=](int k) { return bounds::mixed_pol_bound(set, q, sites, phases, k).total; };
      offset = bounds::commutator_offset(set, n);
    }
    report = witness::certify_mixed(integral, bound, n_eff);
    report.offset_term = offset;
    report.inputs.files = {mixed_path};
    if (spec.clipped > 0) report.notes.push_back(std::to_string(spec.clipped) + " negative intensities clipped");
  }
  report.inputs.gamma = gamma;
  report.inputs.geometry = describe_geometry(cfg);
  write_text(fs::path(f.out) / "witness_report.json", witness::report_json(report));
  write_text(fs::path(f.out) / "witness_report.txt", witness::report_text(report));
  std::cout << witness::report_text(report);
  return kOk;
}

// --------------------------------------------------------------------- verify

int cmd_verify(const Flags& f) {
  const json cfg = load_config(f);
  const json v = get_or(cfg, "verify", json::object());
  verify::VerifyOptions opt;
  opt.seed = f.seed;
  opt.threads = f.threads;
  opt.bound_samples = get_or(v, "bound_samples", opt.bound_samples);
  opt.identity_trials = get_or(v, "identity_trials", opt.identity_trials);
  opt.mixed_trials = get_or(v, "mixed_trials", opt.mixed_trials);
  if (!f.inject_fault.empty()) {
    if (f.inject_fault != "phase-sign") throw ConfigError("unknown fault \"" + f.inject_fault + "\"");
    opt.phase_sign_fault = true;
  }
  ensure_dir(f.out);
  const auto summary = verify::run_verification(opt);
  write_text(fs::path(f.out) / "verify_summary.json", verify::summary_json(summary));
  for (const auto& c : summary.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << format_double(c.value)
              << " limit=" << format_double(c.threshold) << "\n";
  }
  if (!summary.passed()) {
    for (const auto& c : summary.checks) {
      if (!c.passed) std::cerr << "verification failed: " << c.name << "\n";
    }
    return kVerify;
  }
  return kOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON configuration file");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  sub->add_option("--grid", f.grid, "Grid points per angle axis");
  sub->add_option("--channels", f.channels, "Comma-separated channels, e.g. pi-pi,pi-sigma");
  sub->add_option("--k", f.ks, "Comma-separated entanglement depths, e.g. 1,2,3");
  sub->add_option("--gamma", f.gamma, "Core-hole inverse lifetime");
  sub->add_option("--dipole-file", f.dipole_file, "Dipole matrix JSON to use instead of atomic orbitals");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QFI entanglement witnesses from RIXS"};
  app.require_subcommand(1);
  Flags f;
  auto* dipole = app.add_subcommand("dipole", "Write dipole matrices for a geometry");
  auto* bnd = app.add_subcommand("bounds", "Angular sweep of k-producibility bounds");
  auto* sim = app.add_subcommand("simulate", "Exact-diagonalization RIXS spectra on a cluster");
  auto* wit = app.add_subcommand("witness", "Certify entanglement depth from spectra");
  auto* ver = app.add_subcommand("verify", "Run the property and oracle suite");
  for (auto* s : {dipole, bnd, sim, wit, ver}) add_common(s, f);
  bnd->add_flag("--svg", f.svg, "Also write SVG heatmaps");
  ver->add_option("--inject-fault", f.inject_fault, "Test fixture: phase-sign")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*dipole) return cmd_dipole(f);
    if (*bnd) return cmd_bounds(f);
    if (*sim) return cmd_simulate(f);
    if (*wit) return cmd_witness(f);
    if (*ver) return cmd_verify(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kResource;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const DomainError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
